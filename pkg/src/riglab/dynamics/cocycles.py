"""Zero-mean trigonometric cocycles over a rotation and their Birkhoff sums.

A cocycle is ``phi(x) = sum_{1<=|j|<=J} a_j e(jx)`` with ``a_{-j} = conj(a_j)``,
so it is real valued.  Only the coefficients with ``j >= 1`` are stored.

Birkhoff sums ``S_r(phi)(x) = phi(x) + ... + phi(x + (r-1) alpha)`` are
computed two ways: term by term along the orbit, and mode by mode from the
geometric-series identity ``S_q(e_j)(x) = e_j(x) (1 - e_j(q alpha)) / (1 - e_j(alpha))``.
The second route evaluates the ratio at high precision from certified
fractional parts of ``j*alpha`` and ``j*q*alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from ..diophantine import WORK_BITS, Alpha, centered_frac, to_turns
from ..errors import ModeResonance
from . import fixed


@dataclass(frozen=True)
class FourierCocycle:
    """Real cocycle given by its positive-frequency Fourier coefficients.

    Args:
        coefficients: mapping ``j -> a_j`` for ``j >= 1``.
        decay_epsilon: the ``eps`` in the regularity proxy ``|a_j| <= C j^(-2-eps)``.
        decay_constant: ``C``; when omitted the smallest valid constant is used.
    """

    coefficients: tuple[tuple[int, complex], ...]
    decay_epsilon: Fraction = Fraction(1, 2)
    decay_constant: float = 0.0

    def __init__(self, coefficients=(), decay_epsilon=Fraction(1, 2), decay_constant=None):
        items = dict(coefficients).items() if not isinstance(coefficients, dict) else coefficients.items()
        coeffs = tuple(sorted((int(j), complex(a)) for j, a in items if complex(a) != 0))
        for j, _ in coeffs:
            if j < 1:
                raise ValueError(f"store only modes j >= 1 (zero mean, conjugate symmetry); got j={j}")
        eps = Fraction(decay_epsilon)
        if eps <= 0:
            raise ValueError("decay_epsilon must be positive")
        needed = max((abs(a) * j ** (2 + float(eps)) for j, a in coeffs), default=0.0)
        if decay_constant is None:
            decay_constant = needed
        elif needed > decay_constant * (1 + 1e-12):
            raise ValueError(f"coefficients violate |a_j| <= {decay_constant} j^(-2-{eps})")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "decay_epsilon", eps)
        object.__setattr__(self, "decay_constant", float(decay_constant))

    @classmethod
    def zero(cls) -> "FourierCocycle":
        return cls({})

    @classmethod
    def cosine(cls, amplitude: float, j: int = 1) -> "FourierCocycle":
        """``amplitude * cos(2 pi j x)``."""
        return cls({j: amplitude / 2})

    @property
    def J(self) -> int:
        return max((j for j, _ in self.coefficients), default=0)

    def truncate(self, J: int) -> "FourierCocycle":
        return FourierCocycle(
            {j: a for j, a in self.coefficients if j <= J}, self.decay_epsilon, self.decay_constant
        )

    def eval_fixed(self, u) -> np.ndarray:
        """phi at fixed-point arguments; ``j*x mod 1`` is formed exactly."""
        u = np.asarray(u, dtype=np.uint64)
        out = np.zeros(u.shape, dtype=np.float64)
        for j, a in self.coefficients:
            th = fixed.phase(fixed.scale_mod(j, u))
            out += 2.0 * (a.real * np.cos(th) - a.imag * np.sin(th))
        return out

    def __call__(self, x):
        return self.eval_fixed(fixed.from_float(np.mod(x, 1.0)))

    def sup_bound(self) -> float:
        return 2.0 * sum(abs(a) for _, a in self.coefficients)

    def derivative_bound(self) -> float:
        """Upper bound for ``sup |phi'|``."""
        return 2.0 * sum(abs(a) * 2 * math.pi * j for j, a in self.coefficients)

    def tail_bound(self, q: int, J: int) -> float:
        """Bound on ``|S_q(phi) - S_q(phi truncated at J)|`` from the decay proxy.

        ``q * sum_{|j|>J} C |j|^(-2-eps) <= 2 q C J^(-1-eps) / (1+eps)``.
        """
        s = 1 + float(self.decay_epsilon)
        return 2.0 * q * self.decay_constant * J ** (-s) / s

    def __str__(self) -> str:
        return ";".join(f"{j}:{_fmt_complex(a)}" for j, a in self.coefficients)


def _fmt_complex(a: complex) -> str:
    return f"{a.real!r}{a.imag:+}i"


def parse_modes(text: str) -> FourierCocycle:
    """``"1:0.05+0i;3:0.001-0.002i"`` -> cocycle with those positive modes."""
    coeffs = {}
    text = text.strip()
    if not text or text == "0":
        return FourierCocycle.zero()
    for part in text.replace(",", ";").split(";"):
        if not part.strip():
            continue
        j, _, val = part.partition(":")
        if not _:
            raise ValueError(f"mode {part!r} must look like j:value")
        v = val.strip().replace("i", "j")
        coeffs[int(j)] = complex(v)
    return FourierCocycle(coeffs)


# ---------------------------------------------------------------------------
# Birkhoff sums
# ---------------------------------------------------------------------------


def orbit_turns(alpha: Alpha, x, r: int) -> np.ndarray:
    """Fixed-point points ``x + i*alpha``, ``0 <= i < r``."""
    A = np.uint64(to_turns(alpha))
    x0 = fixed.from_float(np.mod(float(x), 1.0))
    return x0 + np.arange(r, dtype=np.uint64) * A


def birkhoff_sum_direct(phi: FourierCocycle, alpha: Alpha, r: int, x) -> float:
    """``S_r(phi)(x)`` summed term by term with correctly rounded summation."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    return math.fsum(phi.eval_fixed(orbit_turns(alpha, x, r)).tolist())


def closed_form_coefficients(phi: FourierCocycle, alpha: Alpha, q: int) -> list[tuple[int, complex]]:
    """``c_j = a_j (1 - e(j q alpha)) / (1 - e(j alpha))`` for every stored mode.

    ``q`` may be negative, in which case ``S_q`` is the backward sum
    ``-S_{|q|}(phi)(x - |q| alpha)``; the same ratio formula covers it.
    """
    out = []
    with mpmath.workprec(WORK_BITS):
        for j, a in phi.coefficients:
            t1 = centered_frac(alpha, j)
            if t1 == 0:
                raise ModeResonance(f"e_{j}(alpha) = 1: mode {j} resonates with alpha")
            tq = centered_frac(alpha, j * q)
            ratio = (1 - mpmath.expjpi(2 * tq)) / (1 - mpmath.expjpi(2 * t1))
            out.append((j, a * complex(ratio)))
    return out


def eval_trig(coeffs, u) -> np.ndarray:
    """``sum_j 2 Re(c_j e(j x))`` at fixed-point ``u``."""
    u = np.asarray(u, dtype=np.uint64)
    out = np.zeros(u.shape, dtype=np.float64)
    for j, c in coeffs:
        th = fixed.phase(fixed.scale_mod(j, u))
        out += 2.0 * (c.real * np.cos(th) - c.imag * np.sin(th))
    return out


def birkhoff_sum_closed(phi: FourierCocycle, alpha: Alpha, q: int, x):
    """``S_q(phi)(x)`` from the per-mode geometric-series identity.

    ``x`` may be a scalar or an array of floats in [0, 1).
    """
    if q == 0:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    coeffs = closed_form_coefficients(phi, alpha, q)
    vals = eval_trig(coeffs, fixed.from_float(np.mod(x, 1.0)))
    return float(vals) if np.ndim(x) == 0 else vals


@dataclass(frozen=True)
class CertifiedSup:
    """Grid maximum ``value``; the true sup lies in ``[value, value + slack]``."""

    value: float
    slack: float

    @property
    def upper(self) -> float:
        return self.value + self.slack


def sup_cocycle_norm(phi: FourierCocycle, alpha: Alpha, q: int, grid: int) -> CertifiedSup:
    """``sup_x |S_q(phi)(x)|`` over a uniform grid, with a Lipschitz slack."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    coeffs = closed_form_coefficients(phi, alpha, q)
    if not coeffs:
        return CertifiedSup(0.0, 0.0)
    vals = np.abs(eval_trig(coeffs, fixed.uniform(grid)))
    lip = 2.0 * sum(abs(c) * 2 * math.pi * j for j, c in coeffs)
    return CertifiedSup(float(vals.max()), lip / (2 * grid))
