"""Segmented sieves for the Mobius and Liouville functions, and prime-volume analytics.

The prime volume of ``q`` is the sum of ``1/p`` over the distinct primes
dividing ``q``.  All set-membership decisions built on it (``D_j``, the
short-progression volume condition) are made in exact rational arithmetic;
floating values are kept only as mirrors for reporting and for fast
table scans, which are re-checked exactly near every decision boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Literal

import numpy as np

from .errors import EpsilonOutOfRange, RangeInvalid, SegmentTooLarge
from .parallel import ordered_map

Kind = Literal["mobius", "liouville"]
KINDS = ("mobius", "liouville")

DEFAULT_SEGMENT = 1 << 20
DEFAULT_MAX_LENGTH = 1 << 28

# Float table scans are exact away from this distance to a threshold; closer
# entries are recomputed in rationals.  Sums of < 64 terms are off by < 1e-13.
_BOUNDARY_SLACK = 1e-9


def base_primes(limit: int) -> np.ndarray:
    """Primes ``p <= limit`` by a plain sieve of Eratosthenes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def _sieve_block(lo: int, hi: int, kind: str, primes: np.ndarray) -> np.ndarray:
    """mu or lambda on [lo, hi) given all primes up to sqrt(hi - 1)."""
    size = hi - lo
    sign = np.ones(size, dtype=np.int8)
    # product of the prime factors found so far; whatever is left over after
    # all small primes is either 1 or a single prime > sqrt(hi - 1)
    found = np.ones(size, dtype=np.int64)
    for p in primes.tolist():
        if p * p >= hi:
            break
        if kind == "mobius":
            start = -lo % p
            sign[start::p] *= -1
            found[start::p] *= p
            p2 = p * p
            sign[-lo % p2 :: p2] = 0
        else:
            pk = p
            while pk < hi:
                start = -lo % pk
                sign[start::pk] *= -1
                found[start::pk] *= p
                pk *= p
    n = np.arange(lo, hi, dtype=np.int64)
    sign[found != n] *= -1
    return sign


@dataclass(frozen=True)
class SignSequence:
    """A sieved block of mu or lambda values on ``[lo, lo + len(values))``."""

    lo: int
    kind: str
    values: np.ndarray = field(repr=False)

    @property
    def hi(self) -> int:
        return self.lo + len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        """Value at the integer ``n`` (absolute index, not offset)."""
        if not self.lo <= n < self.hi:
            raise IndexError(f"{n} outside [{self.lo}, {self.hi})")
        return int(self.values[n - self.lo])


def _segments(lo: int, hi: int, segment_size: int) -> list[tuple[int, int]]:
    return [(s, min(s + segment_size, hi)) for s in range(lo, hi, segment_size)]


def sieve_signs(
    lo: int,
    hi: int,
    kind: Kind,
    *,
    segment_size: int = DEFAULT_SEGMENT,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> SignSequence:
    """Exact mu or lambda on ``[lo, hi)`` by segmented sieving with primes up to sqrt(hi).

    Segments may be computed in worker threads (see ``RIGLAB_THREADS``); the
    result is identical for any worker count.

    Raises:
        RangeInvalid: if ``lo < 1`` or ``lo >= hi``.
        SegmentTooLarge: if ``hi - lo`` exceeds ``max_length``.
    """
    _check_kind(kind)
    if lo < 1 or lo >= hi:
        raise RangeInvalid(f"need 1 <= lo < hi, got lo={lo}, hi={hi}")
    if hi - lo > max_length:
        raise SegmentTooLarge(f"range of {hi - lo} integers exceeds cap {max_length}")
    if segment_size < 1:
        raise ValueError("segment_size must be positive")
    primes = base_primes(math.isqrt(hi - 1))
    parts = ordered_map(lambda seg: _sieve_block(seg[0], seg[1], kind, primes), _segments(lo, hi, segment_size))
    return SignSequence(lo, kind, np.concatenate(parts))


def iter_signs(
    lo: int, hi: int, kind: Kind, *, segment_size: int = DEFAULT_SEGMENT
) -> Iterator[tuple[int, np.ndarray]]:
    """Stream ``(start, values)`` segments covering ``[lo, hi)`` in ascending order."""
    _check_kind(kind)
    if lo < 1 or lo >= hi:
        raise RangeInvalid(f"need 1 <= lo < hi, got lo={lo}, hi={hi}")
    primes = base_primes(math.isqrt(hi - 1))
    for start, stop in _segments(lo, hi, segment_size):
        yield start, _sieve_block(start, stop, kind, primes)


def sign_block(lo: int, hi: int, kind: Kind, primes: np.ndarray) -> np.ndarray:
    """mu or lambda on ``[lo, hi)``, ``lo >= 1``, given ``base_primes(isqrt(hi - 1))`` (or more)."""
    _check_kind(kind)
    if lo < 1 or lo >= hi:
        raise RangeInvalid(f"need 1 <= lo < hi, got lo={lo}, hi={hi}")
    return _sieve_block(lo, hi, kind, primes)


def signs_with_zero(hi: int, kind: Kind) -> np.ndarray:
    """Array ``w`` of length ``hi`` with ``w[n]`` = mu(n) or lambda(n) and ``w[0] = 0``."""
    out = np.zeros(hi, dtype=np.int8)
    if hi > 1:
        out[1:] = sieve_signs(1, hi, kind, max_length=max(hi, DEFAULT_MAX_LENGTH)).values
    return out


# ---------------------------------------------------------------------------
# prime volume
# ---------------------------------------------------------------------------


def distinct_prime_factors(q: int) -> list[int]:
    if q < 1:
        raise RangeInvalid(f"q must be positive, got {q}")
    primes = []
    m = q
    for p in (2, 3, 5):
        if m % p == 0:
            primes.append(p)
            while m % p == 0:
                m //= p
    # wheel mod 30 trial division is fine up to ~1e12; beyond that use sympy
    if m > 1 and m < 10**12:
        d, steps = 7, (4, 2, 4, 2, 4, 6, 2, 6)
        i = 0
        while d * d <= m:
            if m % d == 0:
                primes.append(d)
                while m % d == 0:
                    m //= d
            d += steps[i]
            i = (i + 1) % 8
        if m > 1:
            primes.append(m)
    elif m > 1:
        from sympy import factorint

        primes.extend(factorint(m))
    return sorted(primes)


@dataclass(frozen=True)
class PrimeVolume:
    q: int
    primes: tuple[int, ...]
    volume: Fraction

    @property
    def volume_f(self) -> float:
        return float(self.volume)


def prime_volume(q: int) -> PrimeVolume:
    """Distinct prime divisors of ``q`` and the exact sum of their reciprocals."""
    primes = tuple(distinct_prime_factors(q))
    return PrimeVolume(q, primes, _reciprocal_sum(primes))


def _reciprocal_sum(primes) -> Fraction:
    if not primes:
        return Fraction(0)
    prod = math.prod(primes)
    return Fraction(sum(prod // p for p in primes), prod)


def in_Dj(q: int, j: int) -> bool:
    """Membership of ``q`` in D_j: prime volume strictly below ``j``."""
    if j < 1:
        raise RangeInvalid(f"j must be positive, got {j}")
    return prime_volume(q).volume < j


def mertens_prime_sum(H: int) -> Fraction:
    """Exact sum of ``1/p`` over primes ``p <= H``."""
    if H < 2:
        raise RangeInvalid(f"H must be at least 2, got {H}")
    return _reciprocal_sum(base_primes(H).tolist())


def satisfies_volume_condition(q: int, H: int, epsilon) -> bool:
    """Whether prime_volume(q) <= (1 - epsilon) * sum_{p<=H} 1/p, decided exactly.

    ``epsilon`` must lie strictly between 0 and 1/100; it is converted with
    ``Fraction`` so decimal strings are taken at face value.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < Fraction(1, 100):
        raise EpsilonOutOfRange(f"epsilon must be in (0, 1/100), got {eps}")
    return prime_volume(q).volume <= (1 - eps) * mertens_prime_sum(H)


def volume_table(X: int) -> np.ndarray:
    """Float64 prime volumes of 0..X from one factor-sieve pass (entry 0 unused).

    Reciprocals are accumulated in ascending prime order, so the table is
    deterministic; each entry is within 1e-13 of the exact value.
    """
    if X < 1:
        raise RangeInvalid(f"X must be positive, got {X}")
    vol = np.zeros(X + 1, dtype=np.float64)
    for p in base_primes(X).tolist():
        vol[p::p] += 1.0 / p
    return vol


def distinct_prime_counts(X: int) -> np.ndarray:
    """omega(n) for n = 0..X (entry 0 unused)."""
    if X < 1:
        raise RangeInvalid(f"X must be positive, got {X}")
    omega = np.zeros(X + 1, dtype=np.int16)
    for p in base_primes(X).tolist():
        omega[p::p] += 1
    return omega


def count_Dj(j: int, X: int, table: np.ndarray | None = None) -> int:
    """#{q <= X : q in D_j}, exact."""
    if j < 1:
        raise RangeInvalid(f"j must be positive, got {j}")
    vol = volume_table(X) if table is None else table
    vals = vol[1 : X + 1]
    count = int(np.count_nonzero(vals < j - _BOUNDARY_SLACK))
    near = np.flatnonzero(np.abs(vals - j) <= _BOUNDARY_SLACK) + 1
    count += sum(1 for q in near.tolist() if in_Dj(q, j))
    return count


def density_Dj(j: int, X: int) -> Fraction:
    """Exact finite density #{q <= X : q in D_j} / X."""
    return Fraction(count_Dj(j, X), X)


def max_prime_volume(X: int) -> tuple[int, Fraction]:
    """Maximiser of the prime volume over ``q <= X`` (smallest ``q`` among ties)."""
    if X < 2:
        raise RangeInvalid(f"X must be at least 2, got {X}")
    vals = volume_table(X)
    top = float(vals[1:].max())
    candidates = np.flatnonzero(vals >= top - _BOUNDARY_SLACK)
    best_q, best_v = 0, Fraction(-1)
    for q in candidates.tolist():
        v = prime_volume(q).volume
        if v > best_v:
            best_q, best_v = q, v
    return best_q, best_v


def primorials_upto(X: int) -> list[int]:
    """All primorials 2, 6, 30, ... not exceeding ``X``."""
    out, acc, p = [], 1, 1
    while True:
        p += 1
        while distinct_prime_factors(p) != [p]:
            p += 1
        acc *= p
        if acc > X:
            return out
        out.append(acc)
