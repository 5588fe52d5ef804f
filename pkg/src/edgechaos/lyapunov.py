"""Maximal Lyapunov exponent of the rate network.

Two estimators: Benettin tangent-vector propagation (primary), and the
susceptibility trace Psi^2(tau) = (1/n) ||M(t0 + tau, t0)||_F^2 of the full
fundamental matrix. Psi^2 grows like exp(2 lambda tau), so the susceptibility
convention reports twice the Benettin rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from ._validation import as_matrix, check_state
from .exceptions import NumericalBlowUp, SusceptibilityOverflow
from .netmodel import TANH, SigmoidSpec, rk4_step
from .randmat import sample_matrix
from .stats import RunningStats, fit_power_law

DEFAULTS = {"dt": 0.01, "transient": 200.0, "t_total": 2000.0, "renorm_every": 1.0}
SUSCEPTIBILITY_FACTOR = 2.0
N_BLOCKS = 10


@dataclass(frozen=True)
class LyapunovEstimate:
    """``value`` is per unit time in the Benettin convention.

    For a single trajectory ``stderr`` comes from batch means over
    ``N_BLOCKS`` blocks of the accumulation window; for ensemble estimates it
    is the stderr over realizations.
    """

    value: float
    stderr: float
    n: int
    sigma: float | None
    t_total: float
    transient: float
    renorm_every: float
    dt: float
    convention: str = "benettin"

    @property
    def susceptibility_value(self) -> float:
        return SUSCEPTIBILITY_FACTOR * self.value if self.convention == "benettin" else self.value

    @property
    def benettin_value(self) -> float:
        return self.value if self.convention == "benettin" else self.value / SUSCEPTIBILITY_FACTOR


def _steps(duration, dt):
    return int(round(duration / dt))


def benettin(rhs, x0, v0, dt: float, transient: float, t_total: float,
             renorm_every: float = 1.0):
    """Generic Benettin estimator for a flow with tangent dynamics.

    ``rhs(x, v)`` returns ``(dx/dt, dv/dt)``. The pair is advanced with RK4 and
    ``v`` is renormalized every ``renorm_every`` time units; log growth factors
    after ``transient`` are summed. Returns ``(lambda, stderr, final_x)`` where
    stderr uses batch means.
    """
    if not t_total > transient >= 0:
        raise ValueError("need t_total > transient >= 0")
    if not dt > 0 or not renorm_every >= dt:
        raise ValueError("need dt > 0 and renorm_every >= dt")
    per = max(1, _steps(renorm_every, dt))
    n_transient = _steps(transient, dt) // per
    n_blocks_total = _steps(t_total, dt) // per
    if n_blocks_total <= n_transient:
        raise ValueError("accumulation window shorter than one renormalization interval")
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    v /= np.linalg.norm(v)
    half = 0.5 * dt
    sixth = dt / 6.0
    logs = np.empty(n_blocks_total - n_transient)
    for block in range(n_blocks_total):
        for _ in range(per):
            k1x, k1v = rhs(x, v)
            k2x, k2v = rhs(x + half * k1x, v + half * k1v)
            k3x, k3v = rhs(x + half * k2x, v + half * k2v)
            k4x, k4v = rhs(x + dt * k3x, v + dt * k3v)
            x = x + sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
            v = v + sixth * (k1v + 2.0 * (k2v + k3v) + k4v)
        norm = math.sqrt(float(v @ v))
        if not (math.isfinite(norm) and np.all(np.isfinite(x))):
            raise NumericalBlowUp((block + 1) * per * dt)
        v /= norm
        if block >= n_transient:
            logs[block - n_transient] = math.log(norm)
    interval = per * dt
    lam = float(logs.sum() / (logs.size * interval))
    blocks = np.array_split(logs, min(N_BLOCKS, logs.size))
    rates = [b.sum() / (b.size * interval) for b in blocks]
    stderr = float(np.std(rates, ddof=1) / math.sqrt(len(rates))) if len(rates) > 1 else 0.0
    return lam, stderr, x


def network_rhs(J, s: SigmoidSpec = TANH):
    """``(x, v) -> (-x + J S(x), -v + J (S'(x) v))``."""
    m = as_matrix(J)
    if s.kind == "base" and s.base == "tanh":
        def rhs(x, v):
            t = np.tanh(x)
            return m @ t - x, m @ ((1.0 - t * t) * v) - v
    else:
        def rhs(x, v):
            return m @ s.value(x) - x, m @ (s.deriv(x) * v) - v
    return rhs


def max_lyapunov_benettin(J, s: SigmoidSpec = TANH, x0=None, dt: float = DEFAULTS["dt"],
                          transient: float = DEFAULTS["transient"],
                          t_total: float = DEFAULTS["t_total"],
                          renorm_every: float = DEFAULTS["renorm_every"],
                          seed: int = 0) -> LyapunovEstimate:
    """Benettin estimate of the top Lyapunov exponent of the network.

    ``x0`` defaults to uniform in ``[-1, 1]^n`` from ``derive_seed(seed, 1)``;
    the initial tangent vector is Gaussian from ``derive_seed(seed, 2)``.
    """
    m = as_matrix(J)
    n = m.shape[0]
    if x0 is None:
        x0 = seeding.uniform(seeding.derive_seed(seed, 1), n, -1.0, 1.0)
    x0 = check_state(x0, n)
    v0 = seeding.gaussian(seeding.derive_seed(seed, 2), n)
    lam, err, _ = benettin(network_rhs(m, s), x0, v0, dt, transient, t_total, renorm_every)
    return LyapunovEstimate(lam, err, n, getattr(J, "sigma", None), t_total, transient,
                            renorm_every, dt)


@dataclass(frozen=True)
class SusceptibilityTrace:
    """``log_psi2[i]`` is ``log Psi^2`` at ``tau[i]``; kept in log form to avoid overflow."""

    tau: np.ndarray
    log_psi2: np.ndarray

    @property
    def psi2(self) -> np.ndarray:
        big = np.nonzero(self.log_psi2 > np.log(np.finfo(float).max))[0]
        if big.size:
            raise SusceptibilityOverflow(self.tau[big[0]])
        return np.exp(self.log_psi2)

    def growth_rate(self, start_fraction: float = 0.5) -> float:
        """Slope of ``log Psi^2`` against tau over the tail of the window (susceptibility convention)."""
        keep = self.tau >= start_fraction * self.tau[-1]
        slope, _ = np.polyfit(self.tau[keep], self.log_psi2[keep], 1)
        return float(slope)


def susceptibility_trace(J, s: SigmoidSpec = TANH, x0=None, dt: float = 0.01,
                         t0: float = 200.0, tau_max: float = 100.0,
                         sample_every: float = 0.5, seed: int = 0,
                         max_n: int = 300) -> SusceptibilityTrace:
    """Propagate the fundamental matrix from ``M = I`` at ``t0`` and record ``Psi^2(tau)``.

    The state first runs for ``t0`` (transient). ``M`` is rescaled whenever
    its norm exceeds 1e100 and the scale is carried in log form, so the
    recorded ``log Psi^2`` never overflows.
    """
    m = as_matrix(J)
    n = m.shape[0]
    if n > max_n:
        raise ValueError(f"susceptibility_trace propagates an n x n matrix; n={n} > {max_n}")
    if x0 is None:
        x0 = seeding.uniform(seeding.derive_seed(seed, 1), n, -1.0, 1.0)
    x = check_state(x0, n).copy()

    def f(y):
        return m @ s.value(y) - y

    for i in range(_steps(t0, dt)):
        x = rk4_step(f, x, dt)
    if not np.all(np.isfinite(x)):
        raise NumericalBlowUp(t0)

    def rhs(y, M):
        return m @ s.value(y) - y, m @ (s.deriv(y)[:, None] * M) - M

    M = np.eye(n)
    log_scale = 0.0
    per = max(1, _steps(sample_every, dt))
    n_samples = _steps(tau_max, dt) // per
    taus = [0.0]
    logs = [0.0]
    half, sixth = 0.5 * dt, dt / 6.0
    for k in range(1, n_samples + 1):
        for _ in range(per):
            k1x, k1m = rhs(x, M)
            k2x, k2m = rhs(x + half * k1x, M + half * k1m)
            k3x, k3m = rhs(x + half * k2x, M + half * k2m)
            k4x, k4m = rhs(x + dt * k3x, M + dt * k3m)
            x = x + sixth * (k1x + 2.0 * (k2x + k3x) + k4x)
            M = M + sixth * (k1m + 2.0 * (k2m + k3m) + k4m)
        frob2 = float(np.sum(M * M))
        if not math.isfinite(frob2):
            raise SusceptibilityOverflow(k * per * dt)
        if frob2 > 1e200 or frob2 < 1e-200:
            M /= math.sqrt(frob2)
            log_scale += math.log(frob2)
            frob2 = 1.0
        taus.append(k * per * dt)
        logs.append(log_scale + math.log(frob2 / n))
    return SusceptibilityTrace(np.array(taus), np.array(logs))


@dataclass
class CurvePoint:
    sigma: float
    mean: float
    stderr: float
    values: list
    seeds: list


@dataclass
class LyapunovCurve:
    n: int
    params: dict
    points: list = field(default_factory=list)

    def rows(self):
        for p in self.points:
            for i, v in enumerate(p.values):
                yield {"sigma": p.sigma, "n": self.n, "realization": i, "lambda": v,
                       "convention": "benettin"}
                yield {"sigma": p.sigma, "n": self.n, "realization": i,
                       "lambda": SUSCEPTIBILITY_FACTOR * v, "convention": "susceptibility"}

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([p.sigma for p in self.points])

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.points])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([p.stderr for p in self.points])


def _realization_task(args):
    sigma, n, task_seed, params, s = args
    J = sample_matrix(n, sigma, task_seed)
    return max_lyapunov_benettin(J, s, seed=task_seed, **params).value


def lyapunov_curve(sigma_list, n: int, n_realizations: int = 10, params: dict | None = None,
                   seed: int = 0, s: SigmoidSpec = TANH, map_fn=map) -> LyapunovCurve:
    """Mean and stderr of the Benettin exponent over realizations of J, per sigma.

    Realization ``r`` uses seed ``derive_seed(seed, r)`` at every sigma, so the
    curve is built from the same underlying Gaussian matrices rescaled by
    sigma (common random numbers). ``params`` overrides ``DEFAULTS``.
    """
    sigma_list = [float(x) for x in sigma_list]
    if not sigma_list:
        raise ValueError("sigma_list is empty")
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    p = dict(DEFAULTS)
    p.update(params or {})
    seeds = seeding.derive_seeds(seed, n_realizations)
    tasks = [(sg, n, sd, p, s) for sg in sigma_list for sd in seeds]
    values = list(map_fn(_realization_task, tasks))
    curve = LyapunovCurve(n, p)
    for i, sg in enumerate(sigma_list):
        vals = values[i * n_realizations:(i + 1) * n_realizations]
        acc = RunningStats.of(vals)
        err = acc.stderr if n_realizations > 1 else 0.0
        curve.points.append(CurvePoint(sg, acc.mean, err, vals, seeds))
    return curve


def critical_exponent(curve: LyapunovCurve, critical: float = 1.0):
    """Power-law fit of mean lambda against ``sigma - critical`` (sigma > critical only)."""
    pts = [(p.sigma - critical, p.mean) for p in curve.points if p.sigma > critical]
    return fit_power_law(pts)
