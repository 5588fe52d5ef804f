"""Fakir bed: a frictionless particle among k Gaussian hills inside a soft circular wall.

H(q, p) = |p|^2 / 2 + U(q),
U(q) = sum_a A exp(-|q - c_a|^2 / (2 w^2)) + A_w (|q|^2 / R^2)^m.

Integration is velocity Verlet; the tangent flow is the exact linearization
of the Verlet map, so the Lyapunov estimate is that of the discrete
symplectic map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import seeding
from .exceptions import NumericalBlowUp
from .stats import RunningStats, linear_fit

REFERENCE_SLOPE = 0.36


@dataclass(frozen=True)
class FakirParams:
    amplitude: float = 1.0
    width: float = 0.3
    placement_radius: float = 5.0
    confinement_radius: float = 6.0
    wall_exponent: int = 4
    wall_amplitude: float = 10.0
    energy_fraction: float = 0.5  # initial energy in units of the hill amplitude

    def __post_init__(self):
        if not self.confinement_radius > self.placement_radius > 0:
            raise ValueError("need confinement_radius > placement_radius > 0")
        if self.width <= 0 or self.amplitude <= 0 or self.wall_amplitude <= 0:
            raise ValueError("width and amplitudes must be positive")
        if int(self.wall_exponent) != self.wall_exponent or self.wall_exponent < 1:
            raise ValueError("wall_exponent must be a positive integer")

    @property
    def energy(self) -> float:
        return self.energy_fraction * self.amplitude

    def kernel_args(self):
        return (self.amplitude, 1.0 / self.width ** 2, self.wall_amplitude,
                1.0 / self.confinement_radius ** 2, int(self.wall_exponent))


@dataclass(frozen=True, eq=False)
class FakirLandscape:
    k: int
    centers: np.ndarray  # (k, 2)
    params: FakirParams
    seed: int


@dataclass(frozen=True)
class ParticleState:
    q: np.ndarray
    p: np.ndarray
    t: float = 0.0


@dataclass(frozen=True, eq=False)
class ParticleTrajectory:
    times: np.ndarray
    q: np.ndarray  # (m, 2)
    p: np.ndarray  # (m, 2)
    energy: np.ndarray
    max_energy_drift: float  # max |H(t) - H(0)| / |H(0)| over every step

    @property
    def final(self) -> ParticleState:
        return ParticleState(self.q[-1].copy(), self.p[-1].copy(), float(self.times[-1]))


def sample_landscape(k: int, params: FakirParams | None = None, seed: int = 0) -> FakirLandscape:
    """``k`` hill centers iid uniform on the disc of radius ``placement_radius``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    params = params or FakirParams()
    u = seeding.make_rng(seed).random((k, 2))
    r = params.placement_radius * np.sqrt(u[:, 0])
    theta = 2.0 * np.pi * u[:, 1]
    centers = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    centers.setflags(write=False)
    return FakirLandscape(int(k), centers, params, int(seed))


@numba.njit(cache=True)
def _field(x, y, centers, amp, inv_w2, wall_amp, inv_R2, m):
    """Potential, gradient and Hessian at one point."""
    u = 0.0
    gx = 0.0
    gy = 0.0
    hxx = 0.0
    hxy = 0.0
    hyy = 0.0
    for a in range(centers.shape[0]):
        dx = x - centers[a, 0]
        dy = y - centers[a, 1]
        e = amp * math.exp(-0.5 * (dx * dx + dy * dy) * inv_w2)
        u += e
        gx -= e * dx * inv_w2
        gy -= e * dy * inv_w2
        hxx += e * (dx * dx * inv_w2 - 1.0) * inv_w2
        hxy += e * dx * dy * inv_w2 * inv_w2
        hyy += e * (dy * dy * inv_w2 - 1.0) * inv_w2
    s = (x * x + y * y) * inv_R2
    sm1 = s ** (m - 1)
    u += wall_amp * sm1 * s
    c1 = 2.0 * wall_amp * m * sm1 * inv_R2
    gx += c1 * x
    gy += c1 * y
    c2 = 4.0 * wall_amp * m * (m - 1) * (s ** (m - 2) if m >= 2 else 0.0) * inv_R2 * inv_R2
    hxx += c1 + c2 * x * x
    hxy += c2 * x * y
    hyy += c1 + c2 * y * y
    return u, gx, gy, hxx, hxy, hyy


@numba.njit(cache=True)
def _verlet(q, p, centers, amp, inv_w2, wall_amp, inv_R2, m, dt, n_steps, store_every):
    n_store = n_steps // store_every + 1
    qs = np.empty((n_store, 2))
    ps = np.empty((n_store, 2))
    es = np.empty(n_store)
    x, y, px, py = q[0], q[1], p[0], p[1]
    u, gx, gy, _, _, _ = _field(x, y, centers, amp, inv_w2, wall_amp, inv_R2, m)
    e0 = 0.5 * (px * px + py * py) + u
    qs[0, 0], qs[0, 1], ps[0, 0], ps[0, 1], es[0] = x, y, px, py, e0
    drift = 0.0
    scale = abs(e0) if e0 != 0.0 else 1.0
    j = 1
    for i in range(1, n_steps + 1):
        px -= 0.5 * dt * gx
        py -= 0.5 * dt * gy
        x += dt * px
        y += dt * py
        u, gx, gy, _, _, _ = _field(x, y, centers, amp, inv_w2, wall_amp, inv_R2, m)
        px -= 0.5 * dt * gx
        py -= 0.5 * dt * gy
        e = 0.5 * (px * px + py * py) + u
        d = abs(e - e0) / scale
        if d > drift:
            drift = d
        if not math.isfinite(e):
            return qs[:j], ps[:j], es[:j], math.inf, i
        if i % store_every == 0:
            qs[j, 0], qs[j, 1], ps[j, 0], ps[j, 1], es[j] = x, y, px, py, e
            j += 1
    return qs[:j], ps[:j], es[:j], drift, -1


@numba.njit(cache=True)
def _verlet_tangent(state, tangent, centers, amp, inv_w2, wall_amp, inv_R2, m, dt,
                    per, n_transient, n_blocks):
    """Benettin on the Verlet map; returns the log growth of each accumulated block."""
    x, y, px, py = state[0], state[1], state[2], state[3]
    a, b, c, d = tangent[0], tangent[1], tangent[2], tangent[3]
    nrm = math.sqrt(a * a + b * b + c * c + d * d)
    a, b, c, d = a / nrm, b / nrm, c / nrm, d / nrm
    u, gx, gy, hxx, hxy, hyy = _field(x, y, centers, amp, inv_w2, wall_amp, inv_R2, m)
    logs = np.empty(n_blocks - n_transient)
    h = 0.5 * dt
    for blk in range(n_blocks):
        for _ in range(per):
            px -= h * gx
            py -= h * gy
            c -= h * (hxx * a + hxy * b)
            d -= h * (hxy * a + hyy * b)
            x += dt * px
            y += dt * py
            a += dt * c
            b += dt * d
            u, gx, gy, hxx, hxy, hyy = _field(x, y, centers, amp, inv_w2, wall_amp, inv_R2, m)
            px -= h * gx
            py -= h * gy
            c -= h * (hxx * a + hxy * b)
            d -= h * (hxy * a + hyy * b)
        nrm = math.sqrt(a * a + b * b + c * c + d * d)
        if not math.isfinite(nrm) or not math.isfinite(x + y + px + py):
            logs[:] = math.nan
            return logs
        a, b, c, d = a / nrm, b / nrm, c / nrm, d / nrm
        if blk >= n_transient:
            logs[blk - n_transient] = math.log(nrm)
    return logs


def potential(l: FakirLandscape, q):
    """``(U, grad U)`` at a point ``q`` (shape (2,)) or a batch (shape (m, 2))."""
    q = np.asarray(q, dtype=float)
    pts = np.atleast_2d(q)
    out = np.array([_field(x, y, l.centers.reshape(-1, 2), *l.params.kernel_args())[:3]
                    for x, y in pts])
    U, grad = out[:, 0], out[:, 1:3]
    if q.ndim == 1:
        return float(U[0]), grad[0]
    return U, grad


def hessian(l: FakirLandscape, q) -> np.ndarray:
    _, _, _, hxx, hxy, hyy = _field(float(q[0]), float(q[1]), l.centers.reshape(-1, 2),
                                    *l.params.kernel_args())
    return np.array([[hxx, hxy], [hxy, hyy]])


def energy(l: FakirLandscape, state: ParticleState) -> float:
    return 0.5 * float(state.p @ state.p) + potential(l, state.q)[0]


def initial_state(l: FakirLandscape, seed: int = 0, energy_level: float | None = None,
                  max_tries: int = 100_000) -> ParticleState:
    """Position uniform over the part of the placement disc where ``U < E``, direction uniform.

    The speed is set so the total energy is ``E`` (``params.energy`` by default).
    """
    E = l.params.energy if energy_level is None else energy_level
    rng = seeding.make_rng(seed)
    R = l.params.placement_radius
    for _ in range(max_tries):
        u = rng.random(3)
        r = R * math.sqrt(u[0])
        q = np.array([r * math.cos(2 * math.pi * u[1]), r * math.sin(2 * math.pi * u[1])])
        U = potential(l, q)[0]
        if U < E:
            speed = math.sqrt(2.0 * (E - U))
            p = speed * np.array([math.cos(2 * math.pi * u[2]), math.sin(2 * math.pi * u[2])])
            return ParticleState(q, p, 0.0)
    raise RuntimeError("no accessible starting point found")


def integrate_particle(l: FakirLandscape, state0: ParticleState, dt: float = 1e-3,
                       t_end: float = 10.0, store_every: int = 1) -> ParticleTrajectory:
    """Velocity-Verlet integration of ``q' = p, p' = -grad U(q)``."""
    if not dt > 0 or not t_end > 0:
        raise ValueError("need dt > 0 and t_end > 0")
    n_steps = int(round(t_end / dt))
    qs, ps, es, drift, bad = _verlet(np.asarray(state0.q, float), np.asarray(state0.p, float),
                                     l.centers.reshape(-1, 2), *l.params.kernel_args(),
                                     dt, n_steps, int(store_every))
    if bad >= 0:
        raise NumericalBlowUp(state0.t + bad * dt)
    times = state0.t + dt * store_every * np.arange(len(es))
    times[-1] = state0.t + dt * (store_every * (len(es) - 1))
    return ParticleTrajectory(times, qs, ps, es, float(drift))


def fakir_lyapunov(l: FakirLandscape, state0: ParticleState | None = None, dt: float = 0.01,
                   transient: float = 100.0, t_total: float = 2000.0,
                   renorm_every: float = 1.0, seed: int = 0) -> float:
    """Maximal Lyapunov exponent (per unit time) of one fakir trajectory.

    ``state0`` defaults to :func:`initial_state` with ``derive_seed(seed, 1)``;
    the initial 4-D tangent vector is Gaussian from ``derive_seed(seed, 2)``.
    """
    if not t_total > transient >= 0:
        raise ValueError("need t_total > transient >= 0")
    if state0 is None:
        state0 = initial_state(l, seeding.derive_seed(seed, 1))
    tangent = seeding.gaussian(seeding.derive_seed(seed, 2), 4)
    per = max(1, int(round(renorm_every / dt)))
    n_transient = int(round(transient / dt)) // per
    n_blocks = int(round(t_total / dt)) // per
    state = np.concatenate([state0.q, state0.p]).astype(float)
    logs = _verlet_tangent(state, tangent, l.centers.reshape(-1, 2), *l.params.kernel_args(),
                           dt, per, n_transient, n_blocks)
    if np.any(np.isnan(logs)):
        raise NumericalBlowUp(t_total)
    return float(logs.sum() / (logs.size * per * dt))


def landscape_seed(seed: int, k: int, index: int) -> int:
    """Seed of landscape ``index`` at hill count ``k``; independent of k-list order."""
    return seeding.derive_seed(seeding.derive_seed(seed, k), index)


@dataclass
class SlopeResult:
    k_list: list
    means: np.ndarray
    stderrs: np.ndarray
    slope: float
    intercept: float
    r2: float
    n_landscapes: int
    rows: list = field(default_factory=list)  # (k, landscape_seed, lambda)

    def summary_rows(self):
        for k, m, e in zip(self.k_list, self.means, self.stderrs):
            yield {"k": k, "lambda_mean": m, "lambda_stderr": e,
                   "n_landscapes": self.n_landscapes}

    def regression(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2}


def _landscape_task(args):
    k, lseed, params, lyap = args
    return fakir_lyapunov(sample_landscape(k, params, lseed), seed=lseed, **lyap)


def slope_experiment(k_list, n_landscapes: int = 100, params: FakirParams | None = None,
                     seed: int = 0, lyapunov_params: dict | None = None,
                     map_fn=map) -> SlopeResult:
    """Mean fakir exponent per hill count, regressed on ``log k``."""
    k_list = [int(k) for k in k_list]
    if n_landscapes < 2:
        raise ValueError("n_landscapes must be >= 2")
    if len(k_list) < 2 or any(k < 1 for k in k_list):
        raise ValueError("need at least two positive hill counts")
    params = params or FakirParams()
    lyap = dict(lyapunov_params or {})
    tasks = [(k, landscape_seed(seed, k, j), params, lyap)
             for k in k_list for j in range(n_landscapes)]
    values = list(map_fn(_landscape_task, tasks))
    means, errs, rows = [], [], []
    for i, k in enumerate(k_list):
        vals = values[i * n_landscapes:(i + 1) * n_landscapes]
        acc = RunningStats.of(vals)
        means.append(acc.mean)
        errs.append(acc.stderr)
        rows.extend((k, tasks[i * n_landscapes + j][1], v) for j, v in enumerate(vals))
    slope, intercept, r2 = linear_fit(np.log(k_list), means)
    return SlopeResult(k_list, np.array(means), np.array(errs), slope, intercept, r2,
                       n_landscapes, rows)


def count_critical_points(l: FakirLandscape, n_starts: int = 200, seed: int = 0,
                          tol: float = 1e-10, dedup_tol: float = 1e-6,
                          curvature_tol: float = 1e-8) -> int:
    """Number of critical points of U with at least one negative Hessian eigenvalue.

    Newton on ``grad U = 0`` from every hill center and ``n_starts`` points
    uniform in the confinement disc. Hill tops (two negative eigenvalues) and
    saddles (one) both count.
    """
    R = l.params.confinement_radius
    u = seeding.make_rng(seed).random((n_starts, 2))
    r = R * np.sqrt(u[:, 0])
    starts = np.column_stack([r * np.cos(2 * np.pi * u[:, 1]), r * np.sin(2 * np.pi * u[:, 1])])
    starts = np.vstack([l.centers.reshape(-1, 2), starts])
    found: list = []
    for q in starts:
        q = q.copy()
        for _ in range(100):
            _, g = potential(l, q)
            if np.max(np.abs(g)) <= tol:
                break
            H = hessian(l, q)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                break
            q = q + step
            if not np.all(np.isfinite(q)) or np.linalg.norm(q) > R:
                break
        else:
            continue
        _, g = potential(l, q)
        if np.max(np.abs(g)) > tol or np.linalg.norm(q) > R:
            continue
        if all(np.linalg.norm(q - f) > dedup_tol for f in found):
            found.append(q)
    unstable = 0
    for q in found:
        ev = np.linalg.eigvalsh(hessian(l, q))
        if np.min(ev) < -curvature_tol:
            unstable += 1
    return unstable
