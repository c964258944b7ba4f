"""Rigidity statistics: grid defects ``d(T^q x, x)``, polynomially windowed
rigidity sums and an empirical IET rigidity search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Literal

import numpy as np
from sympy import integer_nthroot

from ..diophantine import dist_nearest_integer
from ..errors import ObservableUnsupported, SegmentTooLarge
from ..parallel import ordered_map
from . import fixed
from .observables import FourierMode, Observable
from .systems import Iet, Rotation, SpecialFlow, State, System, _FibreMixin

Functional = Literal["L2_function_norm", "topological_distance"]
FUNCTIONALS = ("L2_function_norm", "topological_distance")

DEFAULT_GRID = 1 << 14
DEFAULT_DELTA = Fraction(1, 4)
# product grids are capped at this many points in total
MAX_GRID_POINTS = 1 << 22
CHUNK = 1 << 12


@dataclass(frozen=True)
class RigidityReport:
    """Grid rigidity statistics at one return time ``q``.

    ``sup_slack`` bounds how far the true sup can exceed ``sup_defect``
    (None when the displacement has no Lipschitz certificate).  ``excluded``
    counts IET grid points dropped from the statistics because their orbit
    passes within one grid spacing of a discontinuity.  For rotations
    ``sup_defect_exact`` is ``||q alpha||`` as a high-precision mpf.
    """

    q: int
    sup_defect: float
    l2_defect: float
    pr_sum: float
    delta: Fraction
    grid_size: int
    functional: str
    sup_slack: float | None = None
    excluded: int = 0
    sup_defect_exact: object = None


def default_grid(sys: System) -> int:
    """Points per dimension: 2**14, reduced so product grids stay below ``MAX_GRID_POINTS``."""
    dims = sys.torus_dim
    return min(DEFAULT_GRID, int(round(MAX_GRID_POINTS ** (1 / dims))))


def floor_root(q: int, delta) -> int:
    """``floor(q**delta)`` for rational ``delta = u/v`` by exact integer root extraction."""
    d = Fraction(delta)
    if not 0 < d < 1:
        raise ValueError(f"delta must lie in (0, 1), got {d}")
    root, _ = integer_nthroot(q**d.numerator, d.denominator)
    return int(root)


def _chunks(st: State):
    n = len(st)
    return [st.take(slice(i, min(i + CHUNK, n))) for i in range(0, n, CHUNK)]


def _power_grid(sys: System, st: State, m: int) -> State:
    parts = ordered_map(lambda c: sys.power(c, m), _chunks(st))
    tor = np.concatenate([p.torus for p in parts])
    hgt = None if parts[0].height is None else np.concatenate([p.height for p in parts])
    return State(tor, hgt)


def _wsum(w: np.ndarray, v: np.ndarray) -> float:
    return math.fsum((w * v).tolist())


def _iet_near_discontinuity(iet: Iet, st: State, q: int, spacing: float) -> np.ndarray:
    """Mask of points whose first q iterates come within ``spacing`` of a breakpoint."""
    breaks = iet.discontinuity_turns()
    near = np.zeros(len(st), dtype=bool)
    cur = st
    for _ in range(q):
        x = cur.torus[:, 0]
        for b in breaks:
            near |= fixed.circle_dist(x, b) < spacing
        cur = iet.step(cur)
    return near


def rigidity_defect(sys: System, q: int, grid: int | None = None) -> RigidityReport:
    """Sup and RMS of ``d(T^q p, p)`` over a uniform phase-space grid.

    Skew products use a base grid: the displacement does not depend on the
    fibre coordinate.  Special flows weight points by Lebesgue measure on the
    region under the roof.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    grid = grid or default_grid(sys)
    if grid < 2:
        raise ValueError("grid must be >= 2")
    if isinstance(sys, Rotation):
        exact = dist_nearest_integer(q, sys.alpha)
        v = float(exact)
        return RigidityReport(q, v, v, 0.0, DEFAULT_DELTA, grid, "topological_distance", 0.0, 0, exact)
    st, w = sys.defect_grid(grid)
    d = sys.distance(_power_grid(sys, st, q), st)
    excluded = 0
    if isinstance(sys, Iet):
        near = _iet_near_discontinuity(sys, st, q, 1.0 / grid)
        if near.all():
            near[:] = False
        excluded = int(near.sum())
        d, w = d[~near], w[~near] / w[~near].sum()
    lip = sys.lipschitz_of_displacement(q)
    slack = None if lip is None else lip / (2 * grid)
    sup = float(d.max())
    l2 = min(math.sqrt(_wsum(w, d * d)), sup)
    return RigidityReport(q, sup, l2, 0.0, DEFAULT_DELTA, grid, "topological_distance", slack, excluded)


def _sum_grid(sys: System, f: Observable, grid: int, functional: str) -> tuple[State, np.ndarray]:
    """Grid for windowed sums.

    On a skew product the displacement is fibre independent, and so is
    ``|chi(T^n p) - chi(p)|`` for a character ``chi``: a base grid is exact.
    Other product grids are refused beyond ``MAX_GRID_POINTS``.
    """
    if isinstance(sys, _FibreMixin) and (functional == "topological_distance" or isinstance(f, FourierMode)):
        return sys.defect_grid(grid)
    if not isinstance(sys, SpecialFlow) and grid**sys.torus_dim > MAX_GRID_POINTS:
        raise SegmentTooLarge(
            f"grid {grid} gives {grid**sys.torus_dim} points in {sys.torus_dim} dimensions"
            f" (limit {MAX_GRID_POINTS}); use a smaller grid"
        )
    return sys.grid(grid)


def pr_sum(
    sys: System,
    f: Observable,
    q: int,
    delta=DEFAULT_DELTA,
    grid: int | None = None,
    functional: Functional = "L2_function_norm",
) -> RigidityReport:
    """Windowed rigidity sum over ``|j| <= floor(q**delta)``.

    ``L2_function_norm`` sums ``||f o T^(jq) - f||^2`` in the grid measure;
    ``topological_distance`` sums ``max_x d(T^(jq) x, x)``.  The ``j = 0``
    term is identically zero and is skipped.
    """
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    if functional not in FUNCTIONALS:
        raise ValueError(f"functional must be one of {FUNCTIONALS}")
    if not isinstance(f, Observable):
        raise ObservableUnsupported(f"{type(f).__name__} is not a supported observable")
    f.validate(sys)
    delta = Fraction(delta)
    J = floor_root(q, delta)
    grid = grid or default_grid(sys)
    st, w = _sum_grid(sys, f, grid, functional)
    base = f.evaluate(sys, st)
    terms = []
    for j in [k for i in range(1, J + 1) for k in (i, -i)]:
        moved = _power_grid(sys, st, j * q)
        if functional == "L2_function_norm":
            terms.append(_wsum(w, np.abs(f.evaluate(sys, moved) - base) ** 2))
        else:
            terms.append(float(sys.distance(moved, st).max()))
    total = math.fsum(terms)
    rd = rigidity_defect(sys, q, grid)
    return RigidityReport(
        q, rd.sup_defect, rd.l2_defect, total, delta, grid, functional, rd.sup_slack, rd.excluded, rd.sup_defect_exact
    )


def iet_rigidity_search(
    iet: Iet,
    q_max: int,
    tol: float,
    grid: int = DEFAULT_GRID,
    allowed: Callable[[int], bool] | Iterable[int] | None = None,
) -> list[tuple[int, float]]:
    """All ``q <= q_max`` whose full-grid L2 defect is below ``tol``, ascending.

    ``allowed`` restricts the hits to a set of integers, either a predicate
    (for example ``lambda q: in_Dj(q, 2)``) or a collection.
    """
    if q_max < 2:
        raise ValueError(f"q_max must be >= 2, got {q_max}")
    if allowed is not None and not callable(allowed):
        allowed = frozenset(allowed).__contains__
    st, w = iet.grid(grid)
    cur = st
    hits = []
    for q in range(1, q_max + 1):
        cur = iet.step(cur)
        d = iet.distance(cur, st)
        l2 = math.sqrt(_wsum(w, d * d))
        if l2 < tol and (allowed is None or allowed(q)):
            hits.append((q, l2))
    return hits

