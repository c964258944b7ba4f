"""Mobius and Liouville weighted averages along orbits and along arithmetic structure.

Sign sequences are streamed from :mod:`riglab.arith` segment by segment and
consumed in ascending ``n``.  Integer-valued quantities (autocorrelations,
short progression sums, block totals) are accumulated exactly; floating
orbit sums use correctly rounded summation per segment, combined in a
fixed order, so results never depend on the worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import (
    DEFAULT_SEGMENT,
    base_primes,
    in_Dj,
    iter_signs,
    satisfies_volume_condition,
    sign_block,
    signs_with_zero,
)
from .errors import BlocksInvalid, RangeInvalid
from .dynamics.observables import FourierMode, Observable
from .dynamics.systems import Rotation, State, System

DEFAULT_AP_EPSILON = Fraction(1, 200)


def _fsum_complex(v: np.ndarray) -> complex:
    v = np.asarray(v)
    if np.iscomplexobj(v):
        return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))
    return complex(math.fsum(v.tolist()), 0.0)


def _start_state(sys: System, x) -> State:
    pts = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return sys.state(pts)


# ---------------------------------------------------------------------------
# orbit averages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrbitAverage:
    N: int
    kind: str
    value: complex

    @property
    def modulus(self) -> float:
        return abs(self.value)


def weighted_orbit_average(
    sys: System, f: Observable, x, N: int, kind: str, *, segment_size: int = DEFAULT_SEGMENT
) -> OrbitAverage:
    """``(1/N) sum_{n=1}^{N} f(T^n x) w(n)`` with the orbit and the sieve advanced in lockstep."""
    if N < 1:
        raise RangeInvalid(f"N must be >= 1, got {N}")
    f.validate(sys)
    cur = sys.step(_start_state(sys, x))
    partials = []
    for start, w in iter_signs(1, N + 1, kind, segment_size=segment_size):
        block, cur = sys.orbit_block(cur, len(w))
        vals = f.evaluate(sys, block)[:, 0]
        partials.append(_fsum_complex(vals * w))
    total = complex(math.fsum(p.real for p in partials), math.fsum(p.imag for p in partials))
    return OrbitAverage(N, kind, total / N)


# ---------------------------------------------------------------------------
# autocorrelations
# ---------------------------------------------------------------------------


def _correlation_sums(kind: str, hs: list[int], N: int, segment_size: int = DEFAULT_SEGMENT) -> dict[int, int]:
    """Exact ``sum_{n<=N} w(n) w(n+h)`` for each h, streaming with an overlap buffer."""
    hmax = max(hs)
    sums = dict.fromkeys(hs, 0)
    carry = np.zeros(0, dtype=np.int64)
    carry_lo = 1
    for start, seg in iter_signs(1, N + hmax + 1, kind, segment_size=segment_size):
        buf = np.concatenate([carry, seg.astype(np.int64)])
        lo = carry_lo
        # n ranges over [lo, lo + usable) with n + hmax inside the buffer and n <= N
        usable = min(len(buf) - hmax, N + 1 - lo)
        if usable > 0:
            head = buf[:usable]
            for h in hs:
                sums[h] += int(head @ buf[h : h + usable])
            carry, carry_lo = buf[usable:], lo + usable
        else:
            carry = buf
    return sums


def autocorrelation(kind: str, h: int, N: int) -> Fraction:
    """``(1/N) sum_{n<=N} w(n) w(n+h)`` as an exact fraction."""
    if h < 0 or N < 1:
        raise RangeInvalid(f"need h >= 0 and N >= 1, got h={h}, N={N}")
    return Fraction(_correlation_sums(kind, [h], N)[h], N)


@dataclass(frozen=True)
class CorrelationSeries:
    kind: str
    N: int
    entries: dict[int, Fraction] = field(repr=False)
    dj_filter: int | None = None

    @property
    def max_abs(self) -> Fraction:
        return max((abs(v) for v in self.entries.values()), default=Fraction(0))

    @property
    def argmax(self) -> int | None:
        return max(self.entries, key=lambda h: (abs(self.entries[h]), -h), default=None)


def autocorrelation_scan(kind: str, h_max: int, N: int) -> CorrelationSeries:
    """Unfiltered series for ``1 <= h <= h_max``."""
    if h_max < 1 or N < 1:
        raise RangeInvalid(f"need h_max >= 1 and N >= 1, got h_max={h_max}, N={N}")
    hs = list(range(1, h_max + 1))
    sums = _correlation_sums(kind, hs, N)
    return CorrelationSeries(kind, N, {h: Fraction(sums[h], N) for h in hs})


def autocorrelation_scan_Dj(kind: str, j: int, h_max: int, N: int) -> CorrelationSeries:
    """Series over the shifts ``1 <= h <= h_max`` lying in D_j."""
    if j < 1:
        raise RangeInvalid(f"j must be >= 1, got {j}")
    if h_max < 1 or N < 1:
        raise RangeInvalid(f"need h_max >= 1 and N >= 1, got h_max={h_max}, N={N}")
    hs = [h for h in range(1, h_max + 1) if in_Dj(h, j)]
    if not hs:
        return CorrelationSeries(kind, N, {}, j)
    sums = _correlation_sums(kind, hs, N)
    return CorrelationSeries(kind, N, {h: Fraction(sums[h], N) for h in hs}, j)


# ---------------------------------------------------------------------------
# short arithmetic progressions
# ---------------------------------------------------------------------------


def _strided_cumsum(v: np.ndarray, q: int) -> np.ndarray:
    """``C[i] = v[i] + v[i-q] + v[i-2q] + ...``."""
    n = len(v)
    pad = -n % q
    c = np.concatenate([v, np.zeros(pad, dtype=v.dtype)]).reshape(-1, q).cumsum(axis=0).reshape(-1)
    return c[:n]


@dataclass(frozen=True)
class ApAverageReport:
    X: int
    H: int
    q: int
    value: Fraction
    condition_met: bool
    epsilon_used: Fraction
    total: int = 0


def ap_short_average(X: int, H: int, q: int, epsilon=DEFAULT_AP_EPSILON) -> ApAverageReport:
    """``(1/(qXH)) sum_{a<q} sum_{x=X}^{2X-1} |sum_{n in [x, x+qH], n = a (q)} mu(n)|``, exactly.

    ``condition_met`` records whether ``q`` satisfies the prime-volume
    condition against ``H`` with the given ``epsilon``.
    """
    if q < 1 or H < 1 or q * H < 2 or X < q * H:
        raise RangeInvalid(f"need X >= q*H >= 2, got X={X}, H={H}, q={q}")
    qH = q * H
    # index i <-> n = base + i; the q slots below X stay zero
    base = X - q
    hi = 2 * X + qH  # exclusive
    v = np.zeros(hi - base, dtype=np.int64)
    primes = base_primes(math.isqrt(hi - 1))
    v[q:] = sign_block(X, hi, "mobius", primes)
    C = _strided_cumsum(v, q)
    xs = np.arange(X, 2 * X) - base
    # the residue of x itself has H+1 terms in the closed window, every other residue H
    full = np.abs(C[xs + qH] - C[xs - q])
    total = int(full.sum())
    if q > 1:
        m = np.arange(X + 1, 2 * X + q - 1) - base
        part = np.abs(C[m + (H - 1) * q] - C[m - q])
        cp = np.concatenate([[0], np.cumsum(part)])
        # sum over r = 1..q-1 of part at x + r
        k = np.arange(X)
        total += int((cp[k + q - 1] - cp[k]).sum())
    eps = Fraction(epsilon)
    met = satisfies_volume_condition(q, H, eps) if H >= 2 else q == 1
    return ApAverageReport(X, H, q, Fraction(total, q * X * H), met, eps, total)


# ---------------------------------------------------------------------------
# block decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockDecomposition:
    M: int
    L: int
    q: int
    z_star: int
    total_at_z: int
    mean_over_z: Fraction
    totals: tuple[int, ...] = field(repr=False, default=())


def block_z_search(M: int, L: int, q: int) -> BlockDecomposition:
    """Minimise over ``0 <= z < Lq`` the total of ``|sum_{m in block, m = a (q)} mu(m)|``.

    Blocks are ``[z + jLq, z + (j+1)Lq)`` for ``0 <= j <= M // (Lq)``; ``mu(0)`` is 0.
    """
    if L < 1 or q < 1 or M < 2 * L * q:
        raise RangeInvalid(f"need M >= 2*L*q, got M={M}, L={L}, q={q}")
    Lq = L * q
    nblocks = M // Lq + 1
    hi = Lq + nblocks * Lq  # m in [0, hi)
    mu = signs_with_zero(hi, "mobius").astype(np.int64)
    # v[i] <-> m = i - q, so C[i - q] exists for every m >= 0
    v = np.concatenate([np.zeros(q, dtype=np.int64), mu])
    C = _strided_cumsum(v, q)
    m = np.arange(0, hi - Lq + q) + q
    G = np.abs(C[m + (L - 1) * q] - C[m - q])  # |sum of the L terms m, m+q, ..., m+(L-1)q|
    cg = np.concatenate([[0], np.cumsum(G)])
    s = np.arange(nblocks * Lq)
    block_total = cg[s + q] - cg[s]
    totals = block_total.reshape(nblocks, Lq).sum(axis=0)
    z = int(np.argmin(totals))
    return BlockDecomposition(
        M, L, q, z, int(totals[z]), Fraction(int(totals.sum()), Lq), tuple(int(t) for t in totals)
    )


# ---------------------------------------------------------------------------
# good sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoodSetReport:
    epsilon: float
    q: int
    L: int
    M: int
    z: int
    good_m_fraction: float
    good_interval_fraction: float
    good_residue_mean: float
    good_residue_min: float
    mean_rigidity_sum: float
    intervals: int

    @property
    def markov_applies(self) -> bool:
        return self.mean_rigidity_sum < self.epsilon

    @property
    def markov_holds(self) -> bool:
        return (not self.markov_applies) or self.good_m_fraction > 1 - math.sqrt(self.epsilon)


def orbit_values(sys: System, f: Observable, x, start: int, length: int) -> np.ndarray:
    """``f(T^n x)`` for ``start <= n < start + length`` (start may be negative)."""
    f.validate(sys)
    st = sys.power(_start_state(sys, x), start)
    block, _ = sys.orbit_block(st, length)
    return f.evaluate(sys, block)[:, 0]


def rigidity_sums(values: np.ndarray, offset: int, M: int, q: int, L: int) -> np.ndarray:
    """``R(m) = sum_{|j|<L} |F(m + jq) - F(m)|^2`` for the M indices after ``offset``."""
    centre = values[offset : offset + M]
    R = np.zeros(M, dtype=np.float64)
    for j in range(-L + 1, L):
        if j:
            R += np.abs(values[offset + j * q : offset + j * q + M] - centre) ** 2
    return R


def good_set_diagnostics(
    sys: System, f: Observable, x, M: int, q: int, L: int, epsilon: float, z: int = 0
) -> GoodSetReport:
    """Good ``m`` in ``[z, z+M)``, good intervals ``[z+jLq, z+(j+1)Lq)`` and good residues.

    ``m`` is good when ``R(m) < epsilon**(1/2)``; an interval is good when at
    least ``(1 - epsilon**(1/4)) Lq`` of its ``m`` are good; a residue ``a``
    mod ``q`` is good in an interval when some good ``m = a (q)`` lies in it.
    Only complete intervals inside ``[z, z+M)`` are classified.
    """
    if q < 1 or L < 1 or M < L * q:
        raise RangeInvalid(f"need M >= L*q, got M={M}, L={L}, q={q}")
    if not 0 < epsilon < 1:
        raise RangeInvalid(f"epsilon must lie in (0, 1), got {epsilon}")
    reach = (L - 1) * q
    F = orbit_values(sys, f, x, z - reach, M + 2 * reach)
    R = rigidity_sums(F, reach, M, q, L)
    good = R < math.sqrt(epsilon)
    Lq = L * q
    nint = M // Lq
    g = good[: nint * Lq].reshape(nint, Lq)
    interval_good = g.sum(axis=1) >= (1 - epsilon**0.25) * Lq
    residues = g.reshape(nint, L, q).any(axis=1).sum(axis=1) / q
    return GoodSetReport(
        epsilon=float(epsilon),
        q=q,
        L=L,
        M=M,
        z=z,
        good_m_fraction=float(good.mean()),
        good_interval_fraction=float(interval_good.mean()),
        good_residue_mean=float(residues.mean()),
        good_residue_min=float(residues.min()),
        mean_rigidity_sum=math.fsum(R.tolist()) / M,
        intervals=nint,
    )


# ---------------------------------------------------------------------------
# strong MOMO
# ---------------------------------------------------------------------------


def default_block_ends(K: int) -> list[int]:
    """``b_k = floor(k**(3/2))`` for ``k = 1..K``, computed with integer square roots."""
    return [math.isqrt(k**3) for k in range(1, K + 1)]


def block_ends_upto(bK: int) -> list[int]:
    """Default block ends up to and including the last one not exceeding ``bK``."""
    out, k = [], 1
    while math.isqrt(k**3) <= bK:
        out.append(math.isqrt(k**3))
        k += 1
    return out


def monotone_from(ends) -> int:
    """Smallest index ``i`` such that the gaps ``b_{k+1} - b_k`` are nondecreasing for ``k >= i``."""
    gaps = np.diff(np.asarray(ends, dtype=np.int64))
    i = len(gaps)
    while i > 0 and (i == len(gaps) or gaps[i - 1] <= gaps[i]):
        i -= 1
    return i


@dataclass(frozen=True)
class MomoReport:
    K: int
    bK: int
    value: float
    monotone_from: int
    sup_points: int
    exact_sup: bool
    block_sups: tuple[float, ...] = field(repr=False, default=())


def validate_block_ends(ends) -> list[int]:
    b = [int(v) for v in ends]
    if len(b) < 2:
        raise BlocksInvalid("need at least two block ends")
    if b[0] < 0:
        raise BlocksInvalid("block ends must be nonnegative")
    if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
        raise BlocksInvalid("block ends must be strictly increasing")
    return b


def _group_blocks(b: list[int], target: int) -> list[tuple[int, int]]:
    """Consecutive runs of blocks (as index ranges) covering at least ``target`` integers each."""
    groups, k0 = [], 0
    for k in range(1, len(b)):
        if b[k] - b[k0] >= target or k == len(b) - 1:
            groups.append((k0, k))
            k0 = k
    return groups


def momo_average(
    sys: System,
    f: Observable,
    x,
    block_ends,
    kind: str,
    sup_grid: int = 64,
    *,
    segment_size: int = DEFAULT_SEGMENT,
) -> MomoReport:
    """``(1/b_K) sum_{k<K} sup_z |sum_{b_k <= n < b_{k+1}} w(n) f(T^n z)|``.

    The sup is taken over ``x`` together with a uniform grid of ``sup_grid``
    points per dimension.  For a Fourier mode on a rotation the block sums
    have modulus independent of ``z`` and only ``x`` is used (exact sup).
    """
    b = validate_block_ends(block_ends)
    f.validate(sys)
    exact = isinstance(sys, Rotation) and isinstance(f, FourierMode)
    start = _start_state(sys, x)
    if not exact:
        g, _ = sys.grid(sup_grid)
        start = State(
            np.concatenate([start.torus, g.torus]),
            None if start.height is None else np.concatenate([start.height, g.height]),
        )
    bK = b[-1]
    primes = base_primes(math.isqrt(max(bK - 1, 1)))
    cur = sys.power(start, b[0])
    sups = []
    for k0, k1 in _group_blocks(b, segment_size):
        lo, hi = b[k0], b[k1]
        w = np.zeros(hi - lo, dtype=np.int8)
        if hi > max(lo, 1):
            w[max(lo, 1) - lo :] = sign_block(max(lo, 1), hi, kind, primes)
        block, cur = sys.orbit_block(cur, hi - lo)
        vals = f.evaluate(sys, block) * w[:, None]
        for k in range(k0, k1):
            seg = vals[b[k] - lo : b[k + 1] - lo]
            s = np.array([_fsum_complex(seg[:, i]) for i in range(seg.shape[1])])
            sups.append(float(np.abs(s).max()))
    value = math.fsum(sups) / bK
    return MomoReport(len(b), bK, value, monotone_from(b), len(start), exact, tuple(sups))
