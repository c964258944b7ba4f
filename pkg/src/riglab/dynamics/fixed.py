"""Fixed-point circle coordinates.

A point of T = R/Z is stored as a uint64 holding ``round(x * 2**64)``.
Translations are then exact modular additions, so two maps that agree as
rational translations (a 2-interval exchange and the rotation it conjugates
to) produce bit-identical orbits, and long orbits never accumulate
floating-point drift in the base coordinate.
"""

import numpy as np

SCALE = 2.0**64
HALF_SCALE = 2.0**63
MODULUS = 1 << 64


def from_float(x) -> np.ndarray:
    """Floats in [0, 1) to fixed point, truncating to the 2**-64 grid.

    Exact for every double >= 2**-11 (those are already multiples of 2**-64).
    """
    x = np.asarray(x, dtype=np.float64)
    return (x * SCALE).astype(np.uint64)


def to_float(u) -> np.ndarray:
    """Nearest double in [0, 1); values within 2**-54 of 1 wrap to 0."""
    x = np.asarray(u, dtype=np.uint64).astype(np.float64) / SCALE
    return np.where(x >= 1.0, 0.0, x)


def from_delta(t) -> np.ndarray:
    """A real displacement reduced mod 1, as fixed point (resolution 2**-63)."""
    t = np.asarray(t, dtype=np.float64)
    c = t - np.rint(t)
    i = np.rint(c * HALF_SCALE).astype(np.int64)
    with np.errstate(over="ignore"):
        return (i * np.int64(2)).view(np.uint64)


def circle_dist(a, b) -> np.ndarray:
    """||a - b|| on T for fixed-point arrays, as floats."""
    d = np.asarray(a, dtype=np.uint64) - np.asarray(b, dtype=np.uint64)
    return np.minimum(d, np.uint64(0) - d).astype(np.float64) / SCALE


def scale_mod(k: int, u) -> np.ndarray:
    """``k * u mod 2**64`` elementwise (exact frac of k times the point)."""
    return np.asarray(u, dtype=np.uint64) * np.uint64(k % MODULUS)


def phase(u) -> np.ndarray:
    """``2*pi*x`` in [-pi, pi) for fixed-point ``u``, via the signed view."""
    return np.asarray(u, dtype=np.uint64).view(np.int64).astype(np.float64) * (np.pi / HALF_SCALE)


def uniform(n: int) -> np.ndarray:
    """The grid ``i/n``, i < n, in fixed point (exact when n is a power of two)."""
    return np.array([(i * MODULUS) // n for i in range(n)], dtype=np.uint64)
