"""Rotations, skew products, interval exchanges and flows on fixed-point circles."""

from .cocycles import FourierCocycle, birkhoff_sum_closed, birkhoff_sum_direct, sup_cocycle_norm
from .observables import Constant, Coordinate, FourierMode, Lipschitz, Tent
from .rigidity import RigidityReport, iet_rigidity_search, pr_sum, rigidity_defect
from .systems import Anzai, Iet, Rokhlin, Rotation, SpecialFlow, State, System, apply, orbit

__all__ = [
    "Anzai",
    "Constant",
    "Coordinate",
    "FourierCocycle",
    "FourierMode",
    "Iet",
    "Lipschitz",
    "RigidityReport",
    "Rokhlin",
    "Rotation",
    "SpecialFlow",
    "State",
    "System",
    "Tent",
    "apply",
    "birkhoff_sum_closed",
    "birkhoff_sum_direct",
    "iet_rigidity_search",
    "orbit",
    "pr_sum",
    "rigidity_defect",
    "sup_cocycle_norm",
]
