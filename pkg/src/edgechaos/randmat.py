"""Gaussian coupling matrices, their spectra, and shifted log-determinants."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import seeding
from ._validation import as_matrix, check_positive
from .exceptions import EigenConvergenceError

MAX_DENSE_N = 4096


@dataclass(frozen=True, eq=False)
class ConnectivityMatrix:
    """n x n matrix with iid N(0, sigma^2/n) entries, rebuilt exactly from its seed."""

    n: int
    sigma: float
    seed: int
    entries: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray  # complex, length n
    source: str = ""

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)


def sample_matrix(n: int, sigma: float, seed: int, max_n: int = MAX_DENSE_N) -> ConnectivityMatrix:
    """Draw J with entries ``sigma / sqrt(n) * z``, z from the Box-Muller stream of ``seed``.

    Entries are filled row-major. The result is read-only.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > max_n:
        raise ValueError(f"n={n} exceeds the dense cap {max_n}; pass max_n to override")
    check_positive("sigma", sigma)
    n = int(n)
    entries = seeding.gaussian(seed, (n, n), scale=sigma / math.sqrt(n))
    entries.setflags(write=False)
    return ConnectivityMatrix(n, float(sigma), int(seed), entries)


def eigenvalues(m, source: str = "") -> Spectrum:
    """All eigenvalues of a square real matrix (LAPACK Hessenberg + shifted QR)."""
    a = as_matrix(m)
    try:
        ev = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    if not source and isinstance(m, ConnectivityMatrix):
        source = f"n={m.n},sigma={m.sigma},seed={m.seed}"
    return Spectrum(ev.astype(complex), source)


def spectral_radius(m) -> float:
    sp = m if isinstance(m, Spectrum) else eigenvalues(m)
    return float(np.max(sp.moduli))


def scaled_support_radius(sigma: float, gains) -> float:
    """Predicted spectral radius of ``J diag(g)``: ``sqrt(sigma^2/n * sum g_i^2)``.

    Reads the support-disc expression as a squared radius, which is the reading
    that reduces to the circular-law radius ``sigma`` when every gain is 1.
    """
    g = np.asarray(gains, dtype=float)
    return float(sigma * math.sqrt(np.mean(g * g)))


def circular_law_discrepancy(sp: Spectrum | np.ndarray, sigma: float) -> float:
    """Radial Kolmogorov-Smirnov distance to the uniform disc of radius ``sigma``.

    Compares the empirical CDF of ``|lambda|`` with ``r^2 / sigma^2`` over
    ``r`` in ``(0, sigma]``.
    """
    ev = sp.eigenvalues if isinstance(sp, Spectrum) else np.asarray(sp)
    if ev.size == 0:
        raise ValueError("empty spectrum")
    r = np.sort(np.abs(ev))
    count = r.size
    inside = r[r <= sigma]
    k = np.arange(1, inside.size + 1)
    model = (inside / sigma) ** 2
    stats = [0.0]
    if inside.size:
        stats.append(np.max(np.abs(k / count - model)))
        stats.append(np.max(np.abs((k - 1) / count - model)))
    stats.append(abs(inside.size / count - 1.0))
    return float(max(stats))


def log_abs_det_shifted(J) -> float:
    """``(1/n) log |det(J - I)|`` from a partially pivoted LU factorization.

    Returns ``-inf`` when ``J - I`` is exactly singular (with a RuntimeWarning).
    """
    a = as_matrix(J)
    n = a.shape[0]
    shifted = a - np.eye(n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(shifted, check_finite=True)
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        warnings.warn("J - I is singular; log|det| is -inf", RuntimeWarning, stacklevel=2)
        return -math.inf
    return float(np.sum(np.log(diag)) / n)


def log_abs_det_shifted_eig(J) -> float:
    """Same quantity as :func:`log_abs_det_shifted`, via ``(1/n) sum log|lambda - 1|``."""
    sp = eigenvalues(J)
    with np.errstate(divide="ignore"):
        return float(np.mean(np.log(np.abs(sp.eigenvalues - 1.0))))
