"""Topological complexity: closed form, disc quadrature, and the log-det estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from . import seeding
from ._validation import check_positive
from .netmodel import TANH, SigmoidSpec
from .randmat import log_abs_det_shifted, sample_matrix
from .stats import RunningStats

METHODS = ("closed_form", "quadrature", "kac_rice_mc")


@dataclass(frozen=True)
class ComplexityEstimate:
    sigma: float
    n: int  # 0 for analytic values
    value: float  # nats per neuron
    stderr: float
    method: str
    samples: int = 0
    excluded: int = 0  # singular draws dropped by kac_rice_mc

    def as_row(self) -> dict:
        return {"sigma": self.sigma, "n": self.n, "method": self.method,
                "value": self.value, "stderr": self.stderr, "samples": self.samples}


def c_closed_form(sigma: float) -> float:
    """``log(sigma) + (1/sigma^2 - 1)/2`` above 1, zero at or below 1."""
    check_positive("sigma", sigma)
    if sigma <= 1.0:
        return 0.0
    return math.log(sigma) + 0.5 * (1.0 / sigma ** 2 - 1.0)


def closed_form_estimate(sigma: float) -> ComplexityEstimate:
    return ComplexityEstimate(float(sigma), 0, c_closed_form(sigma), 0.0, "closed_form")


def c_quadrature(sigma: float, n_points: int = 1_000_000, seed: int = 0) -> ComplexityEstimate:
    """Monte-Carlo mean of ``log|z - 1|`` for z uniform on the disc of radius sigma.

    Polar sampling: ``r = sigma * sqrt(u)``, ``theta = 2 pi v``.
    """
    check_positive("sigma", sigma)
    if n_points < 100:
        raise ValueError("n_points must be >= 100")
    rng = seeding.make_rng(seed)
    acc = RunningStats()
    chunk = 250_000
    done = 0
    while done < n_points:
        m = min(chunk, n_points - done)
        u = rng.random((m, 2))
        z = sigma * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
        vals = np.log(np.abs(z - 1.0))
        part = RunningStats(m, float(vals.mean()), float(np.sum((vals - vals.mean()) ** 2)))
        acc = acc.merge(part)
        done += m
    return ComplexityEstimate(float(sigma), 0, acc.mean, acc.stderr, "quadrature", n_points)


def harmonic_circle_integral(a: float, b: float, n_points: int = 4096) -> float:
    """Midpoint-rule value of the integral of ``log|a - b e^{i theta}|`` over a full turn.

    The exact value is ``2 pi log(max(a, b))``. For ``a == b`` the integrand has
    a log singularity at ``theta = 0``; the midpoint grid avoids the node and
    the known discrete bias ``2 pi log(2) / n_points`` of the singular part is
    removed.
    """
    check_positive("a", a)
    check_positive("b", b)
    theta = (np.arange(n_points) + 0.5) * (2.0 * np.pi / n_points)
    vals = np.log(np.abs(a - b * np.exp(1j * theta)))
    total = float(vals.sum() * (2.0 * np.pi / n_points))
    if math.isclose(a, b, rel_tol=1e-12):
        total -= 2.0 * np.pi * math.log(2.0) / n_points
    return total


def rho_of_epsilon(sigma: float, s: SigmoidSpec = TANH) -> float:
    """Positive root of ``x / sigma = S(x)``; zero when sigma <= 1."""
    check_positive("sigma", sigma)
    if sigma <= 1.0:
        return 0.0
    if s.kind != "base":
        raise ValueError("rho_of_epsilon needs a base sigmoid")

    def gap(x):
        return 1.0 / sigma - float(s.value(x)) / x

    hi = max(10.0, 2.0 * sigma * s.saturation)
    lo = 1e-12
    return float(bisect(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500))


def build_modified_sigmoid(sigma: float, eta: float | None = None,
                           base: SigmoidSpec = TANH) -> SigmoidSpec:
    """Slope-``1/sigma`` linear core on ``|x| < rho``, ``base`` beyond ``rho + eta``.

    ``eta`` defaults to ``0.1 * rho``.
    """
    if not sigma > 1.0:
        raise ValueError(f"modified sigmoid needs sigma > 1, got {sigma}")
    rho = rho_of_epsilon(sigma, base)
    if eta is None:
        eta = 0.1 * rho
    check_positive("eta", eta)
    return SigmoidSpec(kind="modified", base=base.base, sigma_total=float(sigma),
                       eta=float(eta), rho=rho)


def kac_rice_mc(n: int, sigma: float, n_matrices: int = 50, seed: int = 0) -> ComplexityEstimate:
    """Sample mean and stderr of ``(1/n) log|det(-I + J)|`` over independent J.

    Matrix ``i`` uses seed ``derive_seed(seed, i)``. Singular draws are
    excluded and counted in ``excluded``.
    """
    if n < 2 or n_matrices < 2:
        raise ValueError("kac_rice_mc needs n >= 2 and n_matrices >= 2")
    values = []
    excluded = 0
    for matrix_seed in seeding.derive_seeds(seed, n_matrices):
        v = log_abs_det_shifted(sample_matrix(n, sigma, matrix_seed))
        if math.isinf(v):
            excluded += 1
        else:
            values.append(v)
    acc = RunningStats.of(values)
    return ComplexityEstimate(float(sigma), int(n), acc.mean, acc.stderr, "kac_rice_mc",
                              acc.count, excluded)


def edge_thickness(n: int, target_nats: float = 1.0) -> float:
    """The sigma > 1 at which ``n (sigma - 1)^2`` reaches ``target_nats``."""
    check_positive("n", n)
    check_positive("target_nats", target_nats)
    return 1.0 + math.sqrt(target_nats / n)
