"""Seed derivation and the seeded Gaussian generator shared by every module.

All randomness goes through a Philox counter-based bit generator keyed by a
64-bit integer. Gaussian variates are produced from uniform doubles with the
Box-Muller transform rather than the library's normal sampler, so a matrix can
be rebuilt from ``(n, sigma, seed)`` by anyone who reimplements these few
lines.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(value: int) -> int:
    """One round of the SplitMix64 finalizer on a 64-bit integer."""
    z = (value + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Per-task seed: ``splitmix64(master XOR splitmix64(index))``."""
    return splitmix64((int(master) & MASK64) ^ splitmix64(int(index) & MASK64))


def derive_seeds(master: int, count: int) -> list[int]:
    return [derive_seed(master, i) for i in range(count)]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


def box_muller(rng: np.random.Generator, size: int) -> np.ndarray:
    """Standard normal variates from pairs of uniform doubles.

    Pair ``(u1, u2)`` maps to ``sqrt(-2 log(1 - u1)) * (cos 2 pi u2, sin 2 pi u2)``;
    the cosine branch fills even slots and the sine branch odd slots.
    """
    m = (size + 1) // 2
    u = rng.random((m, 2))
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    out = np.empty(2 * m)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:size]


def gaussian(seed: int, shape, scale: float = 1.0) -> np.ndarray:
    size = int(np.prod(shape))
    return scale * box_muller(make_rng(seed), size).reshape(shape)


def uniform(seed: int, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    return low + (high - low) * make_rng(seed).random(shape)
