"""Rate-network vector field x' = -x + J S(x), its Jacobian and an RK4 integrator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from ._validation import as_matrix, check_positive, check_state
from .exceptions import NumericalBlowUp

_ERF_SCALE = math.sqrt(math.pi) / 2.0  # unit slope at the origin

BASE_SIGMOIDS = ("tanh", "algebraic", "erf")


def _base_value(name, x):
    if name == "tanh":
        return np.tanh(x)
    if name == "algebraic":
        return x / np.sqrt(1.0 + x * x)
    if name == "erf":
        return erf(_ERF_SCALE * x)
    raise ValueError(f"unknown sigmoid {name!r}")


def _base_deriv(name, x):
    if name == "tanh":
        t = np.tanh(x)
        return 1.0 - t * t
    if name == "algebraic":
        return (1.0 + x * x) ** -1.5
    if name == "erf":
        return np.exp(-(_ERF_SCALE * x) ** 2)
    raise ValueError(f"unknown sigmoid {name!r}")


@dataclass(frozen=True)
class SigmoidSpec:
    """Odd sigmoid nonlinearity.

    ``kind="base"`` is one of the unit-slope sigmoids in ``BASE_SIGMOIDS``.
    ``kind="modified"`` is linear with slope ``1/sigma_total`` for
    ``|x| < rho``, equal to the base sigmoid for ``|x| > rho + eta``, and a C1
    cubic Hermite blend in between. Build modified specs with
    :func:`edgechaos.complexity.build_modified_sigmoid`, which computes ``rho``.
    """

    kind: str = "base"
    base: str = "tanh"
    sigma_total: float | None = None
    eta: float | None = None
    rho: float | None = None
    _blend: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.base not in BASE_SIGMOIDS:
            raise ValueError(f"unknown base sigmoid {self.base!r}; choose from {BASE_SIGMOIDS}")
        if self.kind == "base":
            return
        if self.kind != "modified":
            raise ValueError(f"kind must be 'base' or 'modified', got {self.kind!r}")
        if self.sigma_total is None or self.eta is None or self.rho is None:
            raise ValueError("modified sigmoid needs sigma_total, eta and rho")
        check_positive("eta", self.eta)
        check_positive("rho", self.rho, strict=False)
        # Hermite data on [a, b]: value and slope at each end.
        a, b = self.rho, self.rho + self.eta
        ya, ma = a / self.sigma_total, 1.0 / self.sigma_total
        yb = float(_base_value(self.base, b))
        mb = float(_base_deriv(self.base, b))
        object.__setattr__(self, "_blend", (a, b, ya, ma, yb, mb))

    @property
    def saturation(self) -> float:
        return 1.0

    @property
    def slope_at_origin(self) -> float:
        return 1.0 if self.kind == "base" else 1.0 / self.sigma_total

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "base":
            return _base_value(self.base, x)
        a, b, ya, ma, yb, mb = self._blend
        ax = np.abs(x)
        h = b - a
        t = np.clip((ax - a) / h, 0.0, 1.0)
        t2, t3 = t * t, t * t * t
        cubic = ((2 * t3 - 3 * t2 + 1) * ya + (t3 - 2 * t2 + t) * h * ma
                 + (-2 * t3 + 3 * t2) * yb + (t3 - t2) * h * mb)
        out = np.where(ax <= a, ax / self.sigma_total,
                       np.where(ax >= b, _base_value(self.base, ax), cubic))
        return np.sign(x) * out

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "base":
            return _base_deriv(self.base, x)
        a, b, ya, ma, yb, mb = self._blend
        ax = np.abs(x)
        h = b - a
        t = np.clip((ax - a) / h, 0.0, 1.0)
        t2 = t * t
        cubic = ((6 * t2 - 6 * t) * ya / h + (3 * t2 - 4 * t + 1) * ma
                 + (-6 * t2 + 6 * t) * yb / h + (3 * t2 - 2 * t) * mb)
        return np.where(ax <= a, 1.0 / self.sigma_total,
                        np.where(ax >= b, _base_deriv(self.base, ax), cubic))


TANH = SigmoidSpec()


def sigmoid_eval(s: SigmoidSpec, x):
    return s.value(x)


def sigmoid_deriv(s: SigmoidSpec, x):
    return s.deriv(x)


def vector_field(J, s: SigmoidSpec, x) -> np.ndarray:
    """Right-hand side ``-x + J S(x)``."""
    m = as_matrix(J)
    x = check_state(x, m.shape[0])
    return -x + m @ s.value(x)


def jacobian_at(J, s: SigmoidSpec, x) -> np.ndarray:
    """``-I + J diag(S'(x))``: column j of J scaled by ``S'(x_j)``."""
    m = as_matrix(J)
    x = check_state(x, m.shape[0])
    jac = m * s.deriv(x)[None, :]
    jac[np.diag_indices_from(jac)] -= 1.0
    return jac


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)
    dt: float
    method: str = "rk4"
    store_every: int = 1

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def rk4_step(f, x, dt):
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(J, s: SigmoidSpec, x0, dt: float = 0.01, t_end: float = 10.0,
              store_every: int | None = None) -> Trajectory:
    """Fixed-step RK4 solution of the network equations from ``x0``.

    Runs ``ceil(t_end / dt)`` steps, so the last stored time is ``>= t_end``.
    ``store_every`` keeps every k-th step (default: every step when
    ``t_end <= 100``, otherwise about 10^4 stored states). The final state is
    always stored.
    """
    check_positive("dt", dt)
    check_positive("t_end", t_end)
    m = as_matrix(J)
    x = check_state(x0, m.shape[0]).copy()
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    if store_every is None:
        store_every = 1 if t_end <= 100 else max(1, n_steps // 10_000)

    def f(y):
        return -y + m @ s.value(y)

    times, states = [0.0], [x.copy()]
    for i in range(1, n_steps + 1):
        x = rk4_step(f, x, dt)
        if not np.all(np.isfinite(x)):
            raise NumericalBlowUp(i * dt)
        if i % store_every == 0 or i == n_steps:
            times.append(i * dt)
            states.append(x.copy())
    return Trajectory(np.array(times), np.array(states), dt, "rk4", store_every)
