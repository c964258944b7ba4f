"""Continued fractions with exact convergents and certified distances ||q alpha||.

Two carriers for an irrational ``alpha`` are supported:

* :class:`QuadraticSurd` ``(a + b*sqrt(d))/c``.  Partial quotients come from
  the classical periodic algorithm on ``(P + sqrt(D))/Q`` and are exact;
  real values such as ``m*alpha`` are enclosed with integer square roots to
  any requested number of bits.
* :class:`DecimalAlpha`, a decimal string read as an enclosure of width one
  unit in its last digit.  Quotients are produced by floor-and-invert on the
  rational enclosure and a quotient is emitted only when both endpoints agree.

In both cases every decision (a floor, a comparison) that cannot be certified
raises :class:`~riglab.errors.PrecisionExhausted` instead of guessing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union

import mpmath

from .arith import distinct_prime_factors
from .errors import (
    IndexOutOfRange,
    InsufficientExpansion,
    NoSuchK,
    PrecisionExhausted,
    RationalInput,
)

WORK_BITS = 192
BETA_BITS = 128
DIST_BITS = 96


def _floor_div_sqrt(P: int, D: int, Q: int) -> int:
    """floor((P + sqrt(D)) / Q) for non-square D > 0."""
    r = math.isqrt(D)
    if Q > 0:
        return (P + r) // Q
    return (P + r + 1) // Q


def _square_part(d: int) -> tuple[int, int]:
    """Write d = s^2 * t with t squarefree; returns (s, t)."""
    s, t = 1, d
    for p in distinct_prime_factors(d) if d > 1 else ():
        while t % (p * p) == 0:
            t //= p * p
            s *= p
    return s, t


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number ``(a + b*sqrt(d)) / c`` in canonical form.

    Canonical means ``c > 0``, ``d`` squarefree and ``gcd(a, b, c) = 1``.
    A perfect-square ``d`` (or ``b = 0``) is rejected with ``RationalInput``.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        a, b, c, d = self.a, self.b, self.c, self.d
        if c == 0:
            raise ZeroDivisionError("surd denominator is zero")
        if d <= 0:
            raise ValueError(f"radicand must be positive, got {d}")
        s, t = _square_part(d)
        b *= s
        d = t
        if b == 0 or d == 1:
            raise RationalInput(f"({self.a}+{self.b}*sqrt({self.d}))/{self.c} is rational")
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(a, b), c)
        for name, value in zip("abcd", (a // g, b // g, c // g, d)):
            object.__setattr__(self, name, value)

    @classmethod
    def parse(cls, text: str) -> "QuadraticSurd":
        return parse_surd(text)

    def __str__(self) -> str:
        return f"({self.a}{self.b:+d}*sqrt({self.d}))/{self.c}"

    def __add__(self, k):
        if isinstance(k, int):
            return QuadraticSurd(self.a + k * self.c, self.b, self.c, self.d)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, k):
        if isinstance(k, int):
            return self + (-k)
        return NotImplemented

    def __rsub__(self, k):
        if isinstance(k, int):
            return QuadraticSurd(k * self.c - self.a, -self.b, self.c, self.d)
        return NotImplemented

    def floor(self) -> int:
        r = math.isqrt(self.b * self.b * self.d)
        if self.b > 0:
            return (self.a + r) // self.c
        return (self.a - r - 1) // self.c

    def frac(self) -> "QuadraticSurd":
        return self - self.floor()

    def enclose(self, m: int, bits: int) -> tuple[Fraction, Fraction]:
        """Rational interval of width <= 2**-bits containing ``m * self``."""
        if m == 0:
            return Fraction(0), Fraction(0)
        K = bits + 1
        B = m * self.b
        r = math.isqrt(B * B * self.d << (2 * K))
        base = (m * self.a) << K
        den = self.c << K
        if B > 0:
            return Fraction(base + r, den), Fraction(base + r + 1, den)
        return Fraction(base - r - 1, den), Fraction(base - r, den)

    def __float__(self) -> float:
        lo, hi = self.enclose(1, 80)
        return float((lo + hi) / 2)

    def mpf(self, prec: int = WORK_BITS):
        with mpmath.workprec(prec + 8):
            return (mpmath.mpf(self.a) + self.b * mpmath.sqrt(self.d)) / self.c


@dataclass(frozen=True)
class DecimalAlpha:
    """An irrational known through a rational enclosure ``[lo, hi]``."""

    lo: Fraction
    hi: Fraction
    text: str = field(default="", compare=False)

    @classmethod
    def from_string(cls, text: str) -> "DecimalAlpha":
        body = text.strip()
        if body.startswith("dec:"):
            body = body[4:]
        m = re.fullmatch(r"([+-]?)(\d*)\.(\d+)", body)
        if not m:
            raise ValueError(f"not a decimal literal: {text!r}")
        digits = len(m.group(3))
        mid = Fraction(body)
        rad = Fraction(1, 10**digits)
        return cls(mid - rad, mid + rad, body)

    @property
    def fractional_bits(self) -> float:
        width = self.hi - self.lo
        return math.log2(width.denominator) - math.log2(width.numerator) if width else math.inf

    def __str__(self) -> str:
        return f"dec:{self.text}" if self.text else f"dec:[{self.lo},{self.hi}]"

    def enclose(self, m: int, bits: int | None = None) -> tuple[Fraction, Fraction]:
        lo, hi = m * self.lo, m * self.hi
        return (lo, hi) if m >= 0 else (hi, lo)

    def floor(self) -> int:
        a = math.floor(self.lo)
        if math.floor(self.hi) != a:
            raise PrecisionExhausted("integer part of decimal alpha is not determined")
        return a

    def __float__(self) -> float:
        return float((self.lo + self.hi) / 2)

    def mpf(self, prec: int = WORK_BITS):
        with mpmath.workprec(prec):
            return mpmath.mpf((self.lo + self.hi).numerator) / ((self.lo + self.hi).denominator * 2)


Alpha = Union[QuadraticSurd, DecimalAlpha, float, Fraction]

_SURD_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*sqrt\(\s*(\d+)\s*\)|([+-]?)\s*(\d+)")


def parse_surd(text: str) -> QuadraticSurd:
    """Parse ``(a+b*sqrt(d))/c`` with an optional trailing integer offset.

    The numerator may be any signed sum of integers and ``k*sqrt(d)`` terms
    sharing one radicand, e.g. ``(0-1+1*sqrt(2))/1`` or ``(0+1*sqrt(2))/1-1``.
    """
    s = text.replace(" ", "")
    m = re.fullmatch(r"\(((?:[^()]|\([^()]*\))*)\)(?:/([+-]?\d+))?([+-]\d+)?", s)
    if m:
        inner, den, offset = m.group(1), m.group(2), m.group(3)
    else:
        inner, den, offset = s, None, None
    a = b = 0
    d = None
    pos = 0
    while pos < len(inner):
        t = _SURD_TERM.match(inner, pos)
        if not t or t.end() == pos:
            raise ValueError(f"cannot parse surd {text!r}")
        if t.group(3) is not None:
            coef = int(t.group(2)) if t.group(2) else 1
            if t.group(1) == "-":
                coef = -coef
            rad = int(t.group(3))
            if d is not None and rad != d:
                raise ValueError(f"mixed radicands in {text!r}")
            d = rad
            b += coef
        else:
            val = int(t.group(5))
            a += -val if t.group(4) == "-" else val
        pos = t.end()
    if d is None:
        raise RationalInput(f"{text!r} has no square-root term")
    c = int(den) if den else 1
    surd = QuadraticSurd(a, b, c, d)
    if offset:
        surd = surd + int(offset)
    return surd


def parse_alpha(text: str) -> QuadraticSurd | DecimalAlpha:
    """Surd syntax, or ``dec:0.4142...`` for a decimal enclosure."""
    t = text.strip()
    if t.startswith("dec:"):
        return DecimalAlpha.from_string(t)
    try:
        Fraction(t)
    except (ValueError, ZeroDivisionError):
        return parse_surd(t)
    raise RationalInput(f"{text!r} is rational")


def enclose_multiple(alpha: Alpha, m: int, bits: int = WORK_BITS) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``m * alpha``; exact (zero width) for rational carriers."""
    if isinstance(alpha, (QuadraticSurd, DecimalAlpha)):
        return alpha.enclose(m, bits)
    v = Fraction(alpha) * m
    return v, v


def _centered(lo: Fraction, hi: Fraction, bits: int) -> Fraction:
    if hi - lo > Fraction(1, 1 << bits):
        raise PrecisionExhausted(f"enclosure of width {float(hi - lo):.3g} exceeds 2^-{bits}")
    mid = (lo + hi) / 2
    return mid - math.floor(mid + Fraction(1, 2))


def centered_frac(alpha: Alpha, m: int, bits: int = DIST_BITS):
    """``m*alpha - round(m*alpha)`` in [-1/2, 1/2) as an mpf, certified to 2**-bits."""
    lo, hi = enclose_multiple(alpha, m, max(bits, WORK_BITS))
    r = _centered(lo, hi, bits)
    with mpmath.workprec(WORK_BITS):
        return mpmath.mpf(r.numerator) / r.denominator


def dist_nearest_integer(m: int, alpha: Alpha, bits: int = DIST_BITS):
    """||m*alpha||, the distance to the nearest integer, certified to 2**-bits."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    lo, hi = enclose_multiple(alpha, m, max(bits, WORK_BITS))
    r = abs(_centered(lo, hi, bits))
    with mpmath.workprec(WORK_BITS):
        return mpmath.mpf(r.numerator) / r.denominator


def to_turns(alpha: Alpha, m: int = 1, bits: int = 64) -> int:
    """``round(frac(m*alpha) * 2**bits)`` reduced mod ``2**bits`` (fixed-point circle value)."""
    lo, hi = enclose_multiple(alpha, m, bits + 32)
    if hi - lo > Fraction(1, 1 << (bits + 8)) and isinstance(alpha, DecimalAlpha):
        raise PrecisionExhausted("decimal alpha too coarse for fixed-point conversion")
    mid = (lo + hi) / 2
    scaled = mid * (1 << bits)
    return math.floor(scaled + Fraction(1, 2)) % (1 << bits)


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients ``a_1..a_N`` of frac(alpha) with exact convergents.

    ``p[n-1]/q[n-1]`` is the n-th convergent; the recurrences start from
    ``(p_{-1}, p_0, q_{-1}, q_0) = (1, 0, 0, 1)``.  ``period`` is set for
    surds once the complete-quotient state repeats inside the expansion.
    """

    alpha: Alpha
    quotients: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    int_part: int = 0
    preperiod: int | None = None
    period: tuple[int, ...] | None = None

    def __len__(self) -> int:
        return len(self.quotients)

    def a(self, n: int) -> int:
        return self.quotients[self._idx(n)]

    def qn(self, n: int) -> int:
        if n == 0:
            return 1
        if n == -1:
            return 0
        return self.q[self._idx(n)]

    def pn(self, n: int) -> int:
        if n == 0:
            return 0
        if n == -1:
            return 1
        return self.p[self._idx(n)]

    def _idx(self, n: int) -> int:
        if not 1 <= n <= len(self.quotients):
            raise IndexOutOfRange(f"index {n} outside 1..{len(self.quotients)}")
        return n - 1

    def beta_enclosure(self, n: int, bits: int = WORK_BITS) -> tuple[Fraction, Fraction]:
        """Enclosure of ``|q_n alpha - p_n|`` (n >= -1)."""
        lo, hi = enclose_multiple(self.alpha, self.qn(n), bits)
        lo, hi = lo - self.pn(n), hi - self.pn(n)
        if lo >= 0:
            return lo, hi
        if hi <= 0:
            return -hi, -lo
        raise PrecisionExhausted(f"sign of q_{n} alpha - p_{n} is not determined")

    @cached_property
    def beta(self) -> tuple:
        return tuple(best_approx_distances(self))


def _surd_quotients(x: QuadraticSurd, n_terms: int, period_search: int = 10_000):
    """Quotients of 1/x for 0 < x < 1, with period detection.

    The expansion is continued past ``n_terms`` (up to ``period_search`` extra
    steps) only to locate the period; the returned list has ``n_terms`` entries.
    """
    A, B, C, d = x.a, x.b, x.c, x.d
    # 1/x = C (A - B sqrt d) / (A^2 - B^2 d)
    num_a, num_b, den = C * A, -C * B, A * A - B * B * d
    sgn = 1 if num_b > 0 else -1
    P, Q, D = sgn * num_a, sgn * den, num_b * num_b * d
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    seen: dict[tuple[int, int], int] = {}
    quotients: list[int] = []
    preperiod = period = None
    for k in range(n_terms + period_search):
        if period is None:
            state = (P, Q)
            if state in seen:
                preperiod = seen[state]
                period = tuple(quotients[preperiod:k])
            else:
                seen[state] = k
        if k >= n_terms and period is not None:
            break
        a = _floor_div_sqrt(P, D, Q)
        quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return quotients[:n_terms], preperiod, period


def _decimal_quotients(x: DecimalAlpha, n_terms: int) -> list[int]:
    lo, hi = x.lo, x.hi
    quotients = []
    for _ in range(n_terms):
        if lo <= 0:
            raise PrecisionExhausted("decimal enclosure reaches a rational endpoint")
        ylo, yhi = 1 / hi, 1 / lo
        a = math.floor(ylo)
        if math.floor(yhi) != a or yhi == a + 1:
            raise PrecisionExhausted(
                f"quotient {len(quotients) + 1} not certified at {x.fractional_bits:.0f} bits"
            )
        quotients.append(a)
        lo, hi = ylo - a, yhi - a
    return quotients


def cf_expand(alpha: Alpha, n_terms: int) -> ContinuedFraction:
    """Continued fraction of frac(alpha) with ``n_terms`` partial quotients.

    Raises:
        RationalInput: for rational carriers.
        PrecisionExhausted: decimal input too coarse (needs >= 192 fractional
            bits, and enough bits to certify every requested quotient).
    """
    if n_terms < 1:
        raise ValueError(f"n_terms must be >= 1, got {n_terms}")
    preperiod = period = None
    if isinstance(alpha, QuadraticSurd):
        ip = alpha.floor()
        frac = alpha - ip
        quotients, preperiod, period = _surd_quotients(frac, n_terms)
    elif isinstance(alpha, DecimalAlpha):
        if alpha.fractional_bits < WORK_BITS:
            raise PrecisionExhausted(
                f"decimal alpha has {alpha.fractional_bits:.1f} fractional bits, need {WORK_BITS}"
            )
        ip = alpha.floor()
        frac = DecimalAlpha(alpha.lo - ip, alpha.hi - ip, alpha.text)
        quotients = _decimal_quotients(frac, n_terms)
    else:
        raise RationalInput(f"{alpha!r} is rational; use a surd or a decimal enclosure")
    p = [0] * n_terms
    q = [0] * n_terms
    p2, p1, q2, q1 = 1, 0, 0, 1
    for i, a in enumerate(quotients):
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        p[i], q[i] = p1, q1
    return ContinuedFraction(frac, tuple(quotients), tuple(p), tuple(q), ip, preperiod, period)


def best_approx_distances(cf: ContinuedFraction, bits: int = BETA_BITS) -> list:
    """``beta_n = |q_n alpha - p_n|`` for n = 1..N as mpf values certified to 2**-bits.

    Surd enclosures are tightened with the size of ``q_(n+1)``, so tiny
    distances keep about ``WORK_BITS`` relative bits as well.
    """
    out = []
    N = len(cf)
    with mpmath.workprec(WORK_BITS):
        for n in range(1, N + 1):
            # beta_n ~ 1/q_(n+1): extra bits keep the relative precision near WORK_BITS
            scale = cf.qn(min(n + 1, N)).bit_length()
            lo, hi = cf.beta_enclosure(n, WORK_BITS + scale)
            if hi - lo > Fraction(1, 1 << bits):
                raise PrecisionExhausted(f"beta_{n} not certified to 2^-{bits}")
            mid = (lo + hi) / 2
            out.append(mpmath.mpf(mid.numerator) / mid.denominator)
    return out


# ---------------------------------------------------------------------------
# Case A / Case B selection
# ---------------------------------------------------------------------------

CASE_A = "CaseA"
CASE_B = "CaseB"


def _as_fraction(epsilon) -> Fraction:
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {eps}")
    return eps


def classify_index(cf: ContinuedFraction, n: int, epsilon) -> str:
    """CaseA iff q_{n+1} > q_n^(1 + epsilon/4), decided in integers.

    With epsilon = u/v this is q_{n+1}^(4v) > q_n^(4v+u).
    """
    eps = _as_fraction(epsilon)
    if not 1 <= n < len(cf):
        raise IndexOutOfRange(f"classification needs 1 <= n < {len(cf)}, got {n}")
    u, v = eps.numerator, eps.denominator
    return CASE_A if cf.qn(n + 1) ** (4 * v) > cf.qn(n) ** (4 * v + u) else CASE_B


def classification_vector(cf: ContinuedFraction, epsilon) -> list[str]:
    """Classification of every index 1..N-1."""
    return [classify_index(cf, n, epsilon) for n in range(1, len(cf))]


@dataclass(frozen=True)
class RigiditySelection:
    case: str
    indices: tuple[int, ...]
    denominators: tuple[int, ...]
    classification: tuple[str, ...]


def select_rigidity_indices(cf: ContinuedFraction, epsilon, count: int) -> RigiditySelection:
    """Deterministic subsequence choice following the two-case argument for cocycle decay.

    CaseA indices recurring in the second half of the expansion prefix are
    read as "infinitely many CaseA indices" and returned.  Otherwise every
    index strictly after the last pair ``(q_n, q_{n+1})`` that violates the
    CaseB inequality is returned.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if len(cf) < 2:
        raise InsufficientExpansion("need at least two partial quotients")
    classes = classification_vector(cf, epsilon)
    a_idx = [n for n, c in enumerate(classes, start=1) if c == CASE_A]
    half = len(classes) // 2
    if any(n > half for n in a_idx):
        case = CASE_A
        chosen = a_idx
    else:
        case = CASE_B
        first = a_idx[-1] + 2 if a_idx else 1
        chosen = list(range(first, len(classes) + 1))
    if not chosen:
        raise InsufficientExpansion("no admissible index inside the expansion prefix")
    chosen = chosen[:count]
    return RigiditySelection(case, tuple(chosen), tuple(cf.qn(n) for n in chosen), tuple(classes))


def select_rigidity_subsequence(cf: ContinuedFraction, epsilon, count: int) -> list[int]:
    return list(select_rigidity_indices(cf, epsilon, count).denominators)


def choose_intermediate_k(cf: ContinuedFraction, n: int) -> int:
    """Smallest k < n with q_k in [q_n^(1/4), q_n^(1/2)], i.e. q_k^4 >= q_n >= q_k^2."""
    qn = cf.qn(n)
    for k in range(1, n):
        qk = cf.qn(k)
        if qk**4 >= qn and qk * qk <= qn:
            return k
    raise NoSuchK(f"no convergent denominator q_k (k < {n}) lies in [q_n^(1/4), q_n^(1/2)] for q_n={qn}")
