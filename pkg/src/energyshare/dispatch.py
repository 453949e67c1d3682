"""Pick a solver by topology class."""
from __future__ import annotations

from .euler_solver import solve_by_doubling, solve_eulerian
from .model import Instance, InstanceError, SolveResult, TopologyClass, classify
from .path_solver import solve_path_instance
from .tree_solver import solve_tree

METHODS = ("auto", "path", "tree", "cycle", "euler", "double")

_AUTO = {
    TopologyClass.PATH: "path",
    TopologyClass.TREE: "tree",
    TopologyClass.CYCLE: "cycle",
    TopologyClass.EULERIAN: "euler",
    TopologyClass.GENERAL: "double",
}

# classes each method accepts
_ACCEPTS = {
    "path": {TopologyClass.PATH},
    "tree": {TopologyClass.PATH, TopologyClass.TREE},
    "cycle": {TopologyClass.CYCLE},
    "euler": {TopologyClass.CYCLE, TopologyClass.EULERIAN},
    "double": set(TopologyClass),
}


def solve(inst: Instance, method: str = "auto", **kwargs) -> SolveResult:
    """Decide ``inst`` with ``method``; extra keywords go to the tree solver."""
    if method not in METHODS:
        raise InstanceError(f"unknown method {method!r}")
    cls = classify(inst)
    if method == "auto":
        method = _AUTO[cls]
    elif cls not in _ACCEPTS[method]:
        raise InstanceError(f"method {method!r} does not apply to a {cls.value} instance")
    if method == "path":
        res = solve_path_instance(inst)
    elif method == "tree":
        res = solve_tree(inst, **kwargs)
    elif method in ("cycle", "euler"):
        res = solve_eulerian(inst, method)
    else:
        res = solve_by_doubling(inst)
    res.diagnostics.setdefault("class", cls.value)
    return res
