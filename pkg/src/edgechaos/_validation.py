import numpy as np

from .exceptions import DimensionError


def as_matrix(J) -> np.ndarray:
    """Accept a ConnectivityMatrix or anything array-like; return a 2-D float array."""
    m = np.asarray(getattr(J, "entries", J), dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_state(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n:
        raise DimensionError(f"state has shape {x.shape}, expected ({n},)")
    return x


def check_positive(name: str, value, strict: bool = True):
    if strict and not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if not strict and not value >= 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value
