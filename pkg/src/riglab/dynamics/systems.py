"""Simulators for the rigid systems: rotations, Anzai skew products, interval
exchanges, special flows over rotations and Rokhlin extensions with linear
torus fibre flows.

Every system acts on a :class:`State`, a batch of points whose circle
coordinates are fixed-point uint64 values (see :mod:`riglab.dynamics.fixed`)
and, for special flows, a float height above the base.  The public helpers
:func:`apply` and :func:`orbit` accept and return ordinary floats.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..diophantine import Alpha, DecimalAlpha, QuadraticSurd, enclose_multiple, parse_alpha, to_turns
from ..errors import PointOutsideSpace
from . import fixed
from .cocycles import FourierCocycle, closed_form_coefficients, eval_trig

_LENGTH_TOL = Fraction(1, 1 << 64)


@dataclass
class State:
    """A batch of N points: ``torus`` is (N, k) uint64, ``height`` is (N,) float or None."""

    torus: np.ndarray
    height: np.ndarray | None = None

    def __len__(self) -> int:
        return self.torus.shape[0]

    def copy(self) -> "State":
        return State(self.torus.copy(), None if self.height is None else self.height.copy())

    def take(self, idx) -> "State":
        return State(self.torus[idx], None if self.height is None else self.height[idx])

    def to_points(self) -> np.ndarray:
        cols = fixed.to_float(self.torus)
        if self.height is not None:
            cols = np.column_stack([cols, self.height])
        return cols


class System:
    """Base class; subclasses provide ``step``, ``step_back`` and the metric data."""

    torus_dim = 1
    has_height = False
    name = "system"

    @property
    def dim(self) -> int:
        return self.torus_dim + int(self.has_height)

    # -- conversion -------------------------------------------------------
    def state(self, points) -> State:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
            pts = pts.T
        if pts.shape[1] != self.dim:
            raise PointOutsideSpace(f"{self.name} points have {self.dim} coordinates, got {pts.shape[1]}")
        tor = pts[:, : self.torus_dim]
        if not np.all(np.isfinite(pts)) or np.any(tor < 0) or np.any(tor >= 1):
            raise PointOutsideSpace("circle coordinates must lie in [0, 1)")
        st = State(fixed.from_float(tor), pts[:, self.torus_dim].copy() if self.has_height else None)
        self.check(st)
        return st

    def check(self, st: State) -> None:
        pass

    # -- dynamics -----------------------------------------------------------
    def step(self, st: State) -> State:
        raise NotImplementedError

    def step_back(self, st: State) -> State:
        raise NotImplementedError

    def power(self, st: State, m: int) -> State:
        """``T^m`` for any integer m (iterated unless a subclass has a closed form)."""
        out = st
        fn = self.step if m >= 0 else self.step_back
        for _ in range(abs(m)):
            out = fn(out)
        return out if m else st.copy()

    def orbit_block(self, st: State, length: int) -> tuple[list[State] | State, State]:
        """States ``T^0 st .. T^(length-1) st`` stacked on a leading time axis, and ``T^length st``."""
        tor = np.empty((length,) + st.torus.shape, dtype=np.uint64)
        hgt = None if st.height is None else np.empty((length,) + st.height.shape)
        cur = st
        for i in range(length):
            tor[i] = cur.torus
            if hgt is not None:
                hgt[i] = cur.height
            cur = self.step(cur)
        return State(tor, hgt), cur

    # -- metric -------------------------------------------------------------
    def distance(self, a: State, b: State) -> np.ndarray:
        d = fixed.circle_dist(a.torus, b.torus).sum(axis=-1)
        if self.has_height:
            d = d + np.abs(a.height - b.height)
        return d

    def grid(self, n: int) -> tuple[State, np.ndarray]:
        """Uniform product grid with n points per coordinate and Lebesgue weights."""
        g = fixed.uniform(n)
        mesh = np.stack(np.meshgrid(*([g] * self.torus_dim), indexing="ij"), axis=-1).reshape(-1, self.torus_dim)
        return State(mesh), np.full(len(mesh), 1.0 / len(mesh))

    def defect_grid(self, n: int) -> tuple[State, np.ndarray]:
        """Grid used for rigidity statistics (see subclasses for reductions)."""
        return self.grid(n)

    def lipschitz_of_displacement(self, q: int) -> float | None:
        return None

    def discontinuity_turns(self) -> np.ndarray | None:
        return None


def _alpha(value) -> Alpha:
    if isinstance(value, str):
        return parse_alpha(value)
    return value


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Rotation(System):
    """``x -> x + alpha`` on the circle."""

    alpha: Alpha
    name = "rotation"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _alpha(self.alpha))
        object.__setattr__(self, "_A", np.uint64(to_turns(self.alpha)))

    def step(self, st):
        return State(st.torus + self._A)

    def step_back(self, st):
        return State(st.torus - self._A)

    def power(self, st, m):
        return State(st.torus + np.uint64(to_turns(self.alpha, m)))

    def orbit_block(self, st, length):
        steps = np.arange(length, dtype=np.uint64)[:, None, None] * self._A
        return State(st.torus[None] + steps), State(st.torus + np.uint64(length * int(self._A) % fixed.MODULUS))

    def lipschitz_of_displacement(self, q):
        return 0.0


class _FibreMixin:
    """Shared machinery for skew products ``(x, y) -> (x + alpha, y + F(x))``."""

    def _fibre_shift(self, x_turns: np.ndarray) -> np.ndarray:
        """(N, k-1) fixed-point fibre increments for base points x."""
        raise NotImplementedError

    def _fibre_power(self, x_turns: np.ndarray, m: int) -> np.ndarray:
        raise NotImplementedError

    def step(self, st):
        x = st.torus[:, 0]
        tor = np.empty_like(st.torus)
        tor[:, 0] = x + self._A
        tor[:, 1:] = st.torus[:, 1:] + self._fibre_shift(x)
        return State(tor)

    def step_back(self, st):
        x = st.torus[:, 0] - self._A
        tor = np.empty_like(st.torus)
        tor[:, 0] = x
        tor[:, 1:] = st.torus[:, 1:] - self._fibre_shift(x)
        return State(tor)

    def power(self, st, m):
        if m == 0:
            return st.copy()
        x = st.torus[:, 0]
        tor = np.empty_like(st.torus)
        tor[:, 0] = x + np.uint64(to_turns(self.alpha, m))
        tor[:, 1:] = st.torus[:, 1:] + self._fibre_power(x, m)
        return State(tor)

    def orbit_block(self, st, length):
        n = st.torus.shape[0]
        steps = np.arange(length, dtype=np.uint64)[:, None] * self._A
        xs = st.torus[None, :, 0] + steps  # (length, N)
        inc = self._fibre_shift(xs.reshape(-1)).reshape(length, n, -1)
        ys = np.cumsum(inc, axis=0, dtype=np.uint64)
        tor = np.empty((length, n, self.torus_dim), dtype=np.uint64)
        tor[:, :, 0] = xs
        tor[0, :, 1:] = st.torus[:, 1:]
        tor[1:, :, 1:] = st.torus[None, :, 1:] + ys[:-1]
        nxt = st.torus.copy()
        nxt[:, 0] = st.torus[:, 0] + np.uint64(length * int(self._A) % fixed.MODULUS)
        nxt[:, 1:] = st.torus[:, 1:] + ys[-1]
        return State(tor), State(nxt)

    def defect_grid(self, n):
        # fibre translations commute with T, so d(T^q p, p) does not depend on
        # the fibre coordinate: a base grid gives the product-grid statistics
        g = fixed.uniform(n)
        tor = np.zeros((n, self.torus_dim), dtype=np.uint64)
        tor[:, 0] = g
        return State(tor), np.full(n, 1.0 / n)


@dataclass(frozen=True, eq=False)
class Anzai(_FibreMixin, System):
    """``(x, y) -> (x + alpha, y + phi(x))`` on the 2-torus."""

    alpha: Alpha
    phi: FourierCocycle = field(default_factory=FourierCocycle.zero)
    torus_dim = 2
    name = "anzai"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _alpha(self.alpha))
        object.__setattr__(self, "_A", np.uint64(to_turns(self.alpha)))

    def _fibre_shift(self, x):
        return fixed.from_delta(self.phi.eval_fixed(x))[:, None]

    def _fibre_power(self, x, m):
        return fixed.from_delta(eval_trig(closed_form_coefficients(self.phi, self.alpha, m), x))[:, None]

    def lipschitz_of_displacement(self, q):
        c = closed_form_coefficients(self.phi, self.alpha, q)
        return 2.0 * sum(abs(v) * 2 * math.pi * j for j, v in c)


@dataclass(frozen=True, eq=False)
class Rokhlin(_FibreMixin, System):
    """``(x, y) -> (x + alpha, y + f(x) v)`` with y on a torus of dimension len(v)."""

    alpha: Alpha
    f: FourierCocycle
    fiber_velocity: tuple[float, ...] = (1.0,)
    name = "rokhlin"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _alpha(self.alpha))
        object.__setattr__(self, "fiber_velocity", tuple(float(v) for v in self.fiber_velocity))
        if not self.fiber_velocity:
            raise ValueError("fiber_velocity must be non-empty")
        object.__setattr__(self, "_A", np.uint64(to_turns(self.alpha)))

    @property
    def torus_dim(self):
        return 1 + len(self.fiber_velocity)

    def _fibre_shift(self, x):
        fx = self.f.eval_fixed(x)
        return np.stack([fixed.from_delta(fx * v) for v in self.fiber_velocity], axis=-1)

    def _fibre_power(self, x, m):
        s = eval_trig(closed_form_coefficients(self.f, self.alpha, m), x)
        return np.stack([fixed.from_delta(s * v) for v in self.fiber_velocity], axis=-1)

    def lipschitz_of_displacement(self, q):
        c = closed_form_coefficients(self.f, self.alpha, q)
        return 2.0 * sum(abs(v) * 2 * math.pi * j for j, v in c) * sum(abs(v) for v in self.fiber_velocity)


# ---------------------------------------------------------------------------


def _enclosure(value) -> tuple[Fraction, Fraction]:
    if isinstance(value, str):
        v = value.strip()
        if "sqrt" in v or v.startswith("dec:"):
            value = parse_alpha(v)
        else:
            f = Fraction(v)
            return f, f
    if isinstance(value, float):
        f = Fraction(repr(value))
        return f, f
    return enclose_multiple(value, 1, 96)


@dataclass(frozen=True, eq=False)
class Iet(System):
    """d-interval exchange on [0, 1).

    ``permutation[i-1]`` is the position (1-based) that interval ``i`` takes
    after the exchange; ``(2, 1)`` swaps two intervals.  Lengths may be
    floats (read through their decimal repr), fractions, decimal strings or
    surds, and must sum to 1 within 2**-64.
    """

    lengths: tuple
    permutation: tuple[int, ...]
    name = "iet"

    def __post_init__(self):
        lengths = tuple(self.lengths)
        perm = tuple(int(p) for p in self.permutation)
        d = len(lengths)
        if d < 2 or len(perm) != d or sorted(perm) != list(range(1, d + 1)):
            raise ValueError(f"permutation {perm} is not a bijection of 1..{d}")
        encl = [_enclosure(v) for v in lengths]
        if any(lo <= 0 for lo, _ in encl):
            raise ValueError("IET lengths must be positive")
        total_lo = sum(lo for lo, _ in encl)
        total_hi = sum(hi for _, hi in encl)
        if total_hi < 1 - _LENGTH_TOL or total_lo > 1 + _LENGTH_TOL:
            raise ValueError(f"IET lengths sum to {float((total_lo + total_hi) / 2)!r}, not 1")
        fl = [math.floor((lo + hi) / 2 * fixed.MODULUS + Fraction(1, 2)) for lo, hi in encl]
        fl[-1] = fixed.MODULUS - sum(fl[:-1])
        if fl[-1] <= 0:
            raise ValueError("last IET length vanishes in fixed point")
        starts = [sum(fl[:i]) for i in range(d)]
        order = sorted(range(d), key=lambda i: perm[i])
        new_starts = [0] * d
        acc = 0
        for i in order:
            new_starts[i] = acc
            acc += fl[i]
        trans = [(new_starts[i] - starts[i]) % fixed.MODULUS for i in range(d)]
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "_starts", np.array(starts, dtype=np.uint64))
        object.__setattr__(self, "_trans", np.array(trans, dtype=np.uint64))
        inv_order = sorted(range(d), key=lambda i: new_starts[i])
        object.__setattr__(self, "_img_starts", np.array([new_starts[i] for i in inv_order], dtype=np.uint64))
        object.__setattr__(self, "_img_trans", np.array([trans[i] for i in inv_order], dtype=np.uint64))
        object.__setattr__(self, "_py", (starts, trans))

    @classmethod
    def rotation(cls, alpha) -> "Iet":
        """The 2-IET with lengths (1 - alpha, alpha), conjugate to rotation by alpha."""
        a = _alpha(alpha)
        if isinstance(a, QuadraticSurd):
            return cls((1 - a, a), (2, 1))
        if isinstance(a, DecimalAlpha):
            return cls((DecimalAlpha(1 - a.hi, 1 - a.lo), a), (2, 1))
        f = Fraction(repr(a)) if isinstance(a, float) else Fraction(a)
        return cls((1 - f, f), (2, 1))

    def step(self, st):
        x = st.torus[:, 0]
        idx = np.searchsorted(self._starts, x, side="right") - 1
        return State((x + self._trans[idx])[:, None])

    def step_back(self, st):
        x = st.torus[:, 0]
        idx = np.searchsorted(self._img_starts, x, side="right") - 1
        return State((x - self._img_trans[idx])[:, None])

    def orbit_block(self, st, length):
        if len(st) != 1:
            return super().orbit_block(st, length)
        starts, trans = self._py
        x = int(st.torus[0, 0])
        out = [0] * length
        mod = fixed.MODULUS
        for i in range(length):
            out[i] = x
            x = (x + trans[bisect.bisect_right(starts, x) - 1]) % mod
        return State(np.array(out, dtype=np.uint64).reshape(length, 1, 1)), State(np.array([[x]], dtype=np.uint64))

    def discontinuity_turns(self):
        return self._starts.copy()


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpecialFlow(System):
    """Time-1 map of the flow over ``x -> x + alpha`` under the roof ``1 + r(x)``.

    ``roof`` is the zero-mean part ``r`` so that the roof integrates to 1.
    Points are ``(x, s)`` with ``0 <= s < 1 + r(x)``; the metric is
    ``||x - x'|| + |s - s'|`` on this fundamental domain.
    """

    alpha: Alpha
    roof: FourierCocycle = field(default_factory=FourierCocycle.zero)
    check_grid: int = 4096
    name = "special_flow"
    has_height = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", _alpha(self.alpha))
        object.__setattr__(self, "_A", np.uint64(to_turns(self.alpha)))
        vals = self.f_fixed(fixed.uniform(self.check_grid))
        lower = float(vals.min()) - self.roof.derivative_bound() / (2 * self.check_grid)
        if lower <= 0:
            raise ValueError(f"roof minimum is not certified positive (lower bound {lower:.3g})")
        object.__setattr__(self, "roof_min_lower", lower)

    def f_fixed(self, u) -> np.ndarray:
        return 1.0 + self.roof.eval_fixed(u)

    def check(self, st):
        f = self.f_fixed(st.torus[:, 0])
        if np.any(st.height < 0) or np.any(st.height >= f):
            raise PointOutsideSpace("special-flow points need 0 <= s < f(x)")

    def flow(self, st: State, t: float) -> State:
        """Flow for time t by the roof-crossing loop."""
        x = st.torus[:, 0].copy()
        s = st.height + t
        f = self.f_fixed(x)
        over = s >= f
        while over.any():
            s[over] -= f[over]
            x[over] += self._A
            f[over] = self.f_fixed(x[over])
            over = s >= f
        under = s < 0
        while under.any():
            x[under] -= self._A
            f[under] = self.f_fixed(x[under])
            s[under] += f[under]
            under = s < 0
        return State(x[:, None], s)

    def step(self, st):
        return self.flow(st, 1.0)

    def step_back(self, st):
        return self.flow(st, -1.0)

    def power(self, st, m):
        return self.flow(st, float(m))

    def grid(self, n, heights: int | None = None):
        m = heights or max(2, min(n, 64))
        g = fixed.uniform(n)
        f = self.f_fixed(g)
        u = (np.arange(m) + 0.5) / m
        x = np.repeat(g, m)
        s = (f[:, None] * u[None, :]).reshape(-1)
        w = np.repeat(f, m) / (n * m)
        return State(x[:, None], s), w / w.sum()


# ---------------------------------------------------------------------------


def _as_points(sys: System, point) -> tuple[State, bool]:
    scalar = np.ndim(point) == 0
    pts = np.asarray(point, dtype=np.float64).reshape(1, -1)
    return sys.state(pts), scalar


def _unpack(sys: System, pts: np.ndarray, scalar: bool):
    if scalar:
        return float(pts[0, 0])
    return tuple(float(v) for v in pts[0])


def apply(sys: System, point):
    """One application of the map to a single point (float or coordinate tuple)."""
    st, scalar = _as_points(sys, point)
    return _unpack(sys, sys.step(st).to_points(), scalar)


def apply_power(sys: System, point, m: int):
    st, scalar = _as_points(sys, point)
    return _unpack(sys, sys.power(st, m).to_points(), scalar)


def orbit(sys: System, point, n: int) -> np.ndarray:
    """``[point, T point, ..., T^n point]``; shape (n+1,) for 1-d systems, else (n+1, dim)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    st, _ = _as_points(sys, point)
    block, _ = sys.orbit_block(st, n + 1)
    tor = fixed.to_float(block.torus[:, 0, :])
    out = tor if block.height is None else np.column_stack([tor, block.height[:, 0]])
    return out[:, 0] if sys.dim == 1 else out
