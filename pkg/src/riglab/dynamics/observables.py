"""Observables evaluated on batches of phase-space points."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ObservableUnsupported
from . import fixed
from .systems import State, System


class Observable:
    """Base class.  ``evaluate`` maps a :class:`State` of N points to N values."""

    lipschitz: float | None = None

    def evaluate(self, sys: System, st: State) -> np.ndarray:
        raise NotImplementedError

    def validate(self, sys: System) -> None:
        pass


@dataclass(frozen=True)
class FourierMode(Observable):
    """``e_k(x_i) = exp(2 pi i k x_i)`` of circle coordinate ``i``."""

    k: int = 1
    coordinate: int = 0

    @property
    def lipschitz(self) -> float:
        return 2 * np.pi * abs(self.k)

    def validate(self, sys):
        if not 0 <= self.coordinate < sys.torus_dim:
            raise ObservableUnsupported(f"{sys.name} has no circle coordinate {self.coordinate}")

    def evaluate(self, sys, st):
        self.validate(sys)
        th = fixed.phase(fixed.scale_mod(self.k, st.torus[..., self.coordinate]))
        return np.exp(1j * th)


@dataclass(frozen=True)
class Coordinate(Observable):
    """The raw coordinate value (in [0, 1) for circle coordinates, the height for flows)."""

    index: int = 0

    def validate(self, sys):
        if not 0 <= self.index < sys.dim:
            raise ObservableUnsupported(f"{sys.name} has no coordinate {self.index}")

    def evaluate(self, sys, st):
        self.validate(sys)
        if self.index < sys.torus_dim:
            return fixed.to_float(st.torus[..., self.index])
        return np.asarray(st.height, dtype=np.float64)


@dataclass(frozen=True)
class Lipschitz(Observable):
    """A user function of the point coordinates with a declared Lipschitz constant.

    ``func`` receives an array of shape (..., dim) of float coordinates.
    """

    func: Callable[[np.ndarray], np.ndarray]
    constant: float
    label: str = "lipschitz"

    @property
    def lipschitz(self) -> float:
        return self.constant

    def evaluate(self, sys, st):
        tor = fixed.to_float(st.torus)
        pts = tor if st.height is None else np.concatenate([tor, st.height[..., None]], axis=-1)
        return np.asarray(self.func(pts))


@dataclass(frozen=True)
class Tent(Observable):
    """``max(0, 1 - |x_0 - c|_T / w)``: a Lipschitz bump on the first circle coordinate."""

    center: float = 0.5
    width: float = 0.25

    @property
    def lipschitz(self) -> float:
        return 1.0 / self.width

    def evaluate(self, sys, st):
        c = fixed.from_float(np.float64(self.center % 1.0))
        d = fixed.circle_dist(st.torus[..., 0], c)
        return np.maximum(0.0, 1.0 - d / self.width)


@dataclass(frozen=True)
class Constant(Observable):
    value: float = 1.0
    lipschitz = 0.0

    def evaluate(self, sys, st):
        return np.full(st.torus.shape[:-1], self.value, dtype=np.float64)


def parse_observable(text: str) -> Observable:
    """``e1``, ``e-3``, ``e2@1`` (mode on coordinate 1), ``coord0``, ``tent:0.5:0.25``, ``const:1``."""
    t = text.strip().lower()
    if t.startswith("const"):
        _, _, v = t.partition(":")
        return Constant(float(v) if v else 1.0)
    if t.startswith("coord"):
        return Coordinate(int(t[5:] or 0))
    if t.startswith("tent"):
        parts = t.split(":")[1:]
        return Tent(*(float(p) for p in parts))
    if t.startswith("e"):
        k, _, c = t[1:].partition("@")
        return FourierMode(int(k), int(c or 0))
    raise ObservableUnsupported(f"unknown observable {text!r}")
