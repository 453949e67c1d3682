"""Exploration of weighted graphs by mobile agents that can share energy.

Everything is exact: weights, energies and positions are ``Fraction``.
Use :func:`energyshare.solve` for dispatch by topology, or call a solver
module directly.
"""
from __future__ import annotations

from .model import (
    Instance,
    InstanceError,
    Solution,
    SolveResult,
    TopologyClass,
    classify,
    make_instance,
    parse_instance,
    parse_solution,
    serialize_instance,
    serialize_solution,
)
from .dispatch import solve
from .validator import validate

__all__ = [
    "Instance",
    "InstanceError",
    "Solution",
    "SolveResult",
    "TopologyClass",
    "classify",
    "make_instance",
    "parse_instance",
    "parse_solution",
    "serialize_instance",
    "serialize_solution",
    "solve",
    "validate",
]
__version__ = "0.1.0"
