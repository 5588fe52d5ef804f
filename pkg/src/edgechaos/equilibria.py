"""Equilibria of x = J S(x): damped Newton, multi-start search, brute-force oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from ._validation import as_matrix, check_state
from .complexity import rho_of_epsilon
from .exceptions import ConvergenceError, DimensionError
from .netmodel import TANH, SigmoidSpec, jacobian_at
from .randmat import sample_matrix
from .stats import RunningStats

RESIDUAL_TOL = 1e-10


def residual(J, s: SigmoidSpec, x) -> float:
    m = as_matrix(J)
    return float(np.max(np.abs(-x + m @ s.value(x)))) if len(x) else 0.0


def newton_solve(J, s: SigmoidSpec, x0, tol: float = RESIDUAL_TOL, max_iter: int = 100,
                 max_halvings: int = 30, cap: float | None = None) -> np.ndarray:
    """Damped Newton on ``F(x) = -x + J S(x)`` until ``|F|_inf <= tol``.

    Each step halves the Newton increment (up to ``max_halvings`` times) until
    the residual decreases. A singular linearization is retried once with a
    small Tikhonov shift. Raises :class:`ConvergenceError` with reason
    ``max_iter``, ``singular``, ``diverged`` or ``stalled``.
    """
    m = as_matrix(J)
    n = m.shape[0]
    x = check_state(x0, n).copy()
    if cap is None:
        cap = 10.0 * (np.max(np.sum(np.abs(m), axis=1)) * s.saturation + 1.0)

    def F(y):
        return -y + m @ s.value(y)

    fx = F(x)
    res = np.max(np.abs(fx))
    for _ in range(max_iter):
        if res <= tol:
            return x
        jac = jacobian_at(m, s, x)
        try:
            step = np.linalg.solve(jac, -fx)
        except np.linalg.LinAlgError:
            shift = 1e-8 * max(1.0, np.linalg.norm(jac, ord=np.inf))
            try:
                step = np.linalg.solve(jac + shift * np.eye(n), -fx)
            except np.linalg.LinAlgError:
                raise ConvergenceError("singular") from None
        if not np.all(np.isfinite(step)):
            raise ConvergenceError("singular")
        alpha = 1.0
        for _ in range(max_halvings + 1):
            trial = x + alpha * step
            f_trial = F(trial)
            r_trial = np.max(np.abs(f_trial))
            if r_trial < res:
                break
            alpha *= 0.5
        else:
            if res <= 1e3 * tol:
                return x  # stuck at roundoff level just above tol
            raise ConvergenceError("stalled")
        x, fx, res = trial, f_trial, r_trial
        if np.max(np.abs(x)) > cap:
            raise ConvergenceError("diverged")
    if res <= tol:
        return x
    raise ConvergenceError("max_iter")


@dataclass
class EquilibriumSet:
    """Deduplicated roots; ``unstable_dims[i]`` counts Jacobian eigenvalues with Re > 0."""

    roots: list
    unstable_dims: list
    residuals: list
    residual_tol: float
    dedup_tol: float
    n_starts: int = 0
    successes: int = 0
    failures: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.roots)

    @property
    def count(self) -> int:
        return len(self.roots)

    def as_array(self) -> np.ndarray:
        return np.array(self.roots)


def _dedup_add(roots, candidate, tol) -> bool:
    for r in roots:
        if np.linalg.norm(r - candidate) <= tol:
            return False
    roots.append(candidate)
    return True


def default_box_radius(sigma: float, s: SigmoidSpec = TANH) -> float:
    return 3.0 * sigma * s.saturation


def find_equilibria(J, s: SigmoidSpec = TANH, n_starts: int = 200,
                    box_radius: float | None = None, seed: int = 0,
                    tol: float = RESIDUAL_TOL, dedup_tol: float | None = None) -> EquilibriumSet:
    """Multi-start Newton search for the equilibria of the network.

    Starts at the origin and at ``n_starts`` points uniform in the box
    ``[-box_radius, box_radius]^n``; ``-r`` is added for every root ``r`` found
    (the field is odd). ``box_radius`` defaults to ``3 * sigma * saturation``
    with sigma read from ``J`` when it carries one, else estimated from the
    entries.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    m = as_matrix(J)
    n = m.shape[0]
    if box_radius is None:
        sigma = getattr(J, "sigma", None) or float(np.sqrt(n * np.mean(m * m)))
        box_radius = default_box_radius(sigma, s)
    if dedup_tol is None:
        dedup_tol = 1e-6 * math.sqrt(n)
    starts = seeding.uniform(seed, (n_starts, n), -box_radius, box_radius)

    roots = [np.zeros(n)]
    failures: dict = {}
    successes = 0
    for x0 in starts:
        try:
            r = newton_solve(m, s, x0, tol=tol)
        except ConvergenceError as exc:
            failures[exc.reason] = failures.get(exc.reason, 0) + 1
            continue
        successes += 1
        if _dedup_add(roots, r, dedup_tol):
            _dedup_add(roots, -r, dedup_tol)

    unstable, residuals = [], []
    for r in roots:
        ev = np.linalg.eigvals(jacobian_at(m, s, r))
        unstable.append(int(np.count_nonzero(ev.real > 0)))
        residuals.append(residual(m, s, r))
    return EquilibriumSet(roots, unstable, residuals, tol, dedup_tol, n_starts, successes, failures)


def grid_oracle(J, s: SigmoidSpec = TANH, box_radius: float | None = None,
                resolution: int | None = None) -> int:
    """Brute-force equilibrium count for n = 1 or 2.

    ``box_radius`` defaults to ``max_i sum_j |J_ij| * saturation`` (plus a
    margin), which contains every equilibrium. For n = 1 roots are counted as
    sign changes of ``-x + J S(x)`` on a uniform grid; for n = 2 every grid cell
    whose corner values bracket zero in both components seeds a Newton solve.
    """
    m = as_matrix(J)
    n = m.shape[0]
    if n > 2:
        raise DimensionError("grid_oracle only handles n <= 2")
    if box_radius is None:
        box_radius = float(np.max(np.sum(np.abs(m), axis=1))) * s.saturation * 1.05 + 1e-3
    if n == 1:
        resolution = resolution or 100_000
        # odd grid size puts a node exactly at the origin
        xs = np.linspace(-box_radius, box_radius, 2 * (resolution // 2) + 1)
        f = -xs + m[0, 0] * s.value(xs)
        sign = np.sign(f)
        # exact zeros at nodes plus strict sign flips between neighbouring nodes
        zeros = int(np.count_nonzero(sign == 0))
        return zeros + int(np.count_nonzero(sign[1:] * sign[:-1] < 0))

    resolution = resolution or 400
    g = np.linspace(-box_radius, box_radius, resolution + 1)
    X, Y = np.meshgrid(g, g, indexing="ij")
    SX, SY = s.value(X), s.value(Y)
    F1 = -X + m[0, 0] * SX + m[0, 1] * SY
    F2 = -Y + m[1, 0] * SX + m[1, 1] * SY

    def brackets(F):
        c = np.stack([F[:-1, :-1], F[1:, :-1], F[:-1, 1:], F[1:, 1:]])
        return (c.min(axis=0) <= 0) & (c.max(axis=0) >= 0)

    cells = np.argwhere(brackets(F1) & brackets(F2))
    h = g[1] - g[0]
    roots: list = []
    for i, j in cells:
        center = np.array([g[i] + h / 2, g[j] + h / 2])
        try:
            r = newton_solve(m, s, center)
        except ConvergenceError:
            continue
        if np.all(np.abs(r) <= box_radius):
            _dedup_add(roots, r, 1e-7)
    if not any(np.linalg.norm(r) <= 1e-7 for r in roots):
        roots.append(np.zeros(2))
    return len(roots)


@dataclass
class CountEstimate:
    sigma: float
    n: int
    mean: float
    stderr: float
    n_matrices: int
    counts: list
    matrix_seeds: list
    n_starts: int
    successes: list  # converged Newton starts per realization

    def rows(self):
        for i, c in enumerate(self.counts):
            yield {"sigma": self.sigma, "n": self.n, "realization": i, "count": c}


def count_for_seed(sigma: float, n: int, matrix_seed: int, n_starts: int,
                   s: SigmoidSpec = TANH) -> tuple[int, int]:
    """Equilibrium count and converged-start count for one matrix realization."""
    J = sample_matrix(n, sigma, matrix_seed)
    eq = find_equilibria(J, s, n_starts=n_starts, seed=seeding.derive_seed(matrix_seed, 1))
    return eq.count, eq.successes


def mean_count(sigma: float, n: int, n_matrices: int = 50, n_starts: int = 200,
               seed: int = 0, s: SigmoidSpec = TANH, map_fn=map) -> CountEstimate:
    """Average equilibrium count over ``n_matrices`` realizations of J.

    Realization ``i`` uses matrix seed ``derive_seed(seed, i)``; its Newton
    starts use ``derive_seed(matrix_seed, 1)``. ``map_fn`` may be a pool's
    ordered ``map``.
    """
    if sigma <= 0 or n < 1 or n_matrices < 1 or n_starts < 1:
        raise ValueError("mean_count arguments must be positive")
    seeds = seeding.derive_seeds(seed, n_matrices)
    results = list(map_fn(_count_task, [(sigma, n, ms, n_starts, s) for ms in seeds]))
    counts = [c for c, _ in results]
    acc = RunningStats.of(counts)
    stderr = acc.stderr if n_matrices > 1 else math.nan
    return CountEstimate(float(sigma), int(n), acc.mean, stderr, n_matrices, counts, seeds,
                         n_starts, [k for _, k in results])


def _count_task(args):
    return count_for_seed(*args)


def ball_confinement_check(J, sigma: float, s: SigmoidSpec = TANH, n_starts: int = 200,
                           seed: int = 0, slack: float = 0.10) -> bool:
    """True if every equilibrium found lies within ``(1 + slack) * rho`` in the sup norm.

    The search box is ``3 * sigma * saturation`` wide, well outside the ball.
    """
    rho = rho_of_epsilon(sigma, s) if sigma > 1 else 0.0
    eq = find_equilibria(J, s, n_starts=n_starts, seed=seed,
                         box_radius=default_box_radius(max(sigma, 1.0), s))
    bound = (1.0 + slack) * rho + eq.residual_tol
    return all(np.max(np.abs(r)) <= bound for r in eq.roots)
