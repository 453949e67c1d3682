"""Exploration of a path by a left-to-right greedy sweep.

The path is laid out on the segment [0, L].  Agents are processed in
coordinate order; each is given the cheapest canonical trajectory that
settles the running energy balance ``tr`` left behind by its predecessors
and then pushes the explored frontier ``ell`` as far right as it can.
A zero-energy dummy agent at L closes the sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import (
    Give,
    Instance,
    InstanceError,
    Lift,
    Move,
    Point,
    Recv,
    Solution,
    SolveResult,
    TopologyClass,
    classify,
    normalize,
)

ZERO = Fraction(0)


@dataclass(frozen=True)
class PathEmbedding:
    order: tuple[int, ...]                  # vertices from one end to the other
    coords: tuple[Fraction, ...]            # coordinate of order[t]
    pedges: tuple[tuple[int, bool], ...]    # edge between order[t], order[t+1]; True if stored u == order[t]
    agent_ids: tuple[int, ...]              # sorted by coordinate, then id
    s: tuple[Fraction, ...]
    agent_vertex: tuple[int, ...] = ()

    @property
    def length(self) -> Fraction:
        return self.coords[-1]

    @property
    def k(self) -> int:
        return len(self.agent_ids)


@dataclass(frozen=True)
class CanonicalTrajectory:
    agent_id: int
    s: Fraction
    left: Fraction
    right: Fraction
    first: str | None            # "left", "right" or None for a one-sided / empty walk
    give_left: Fraction = ZERO
    give_right: Fraction = ZERO
    receive: Fraction = ZERO
    receive_from: str | None = None
    case: str = ""

    @property
    def doubly_covered(self) -> Fraction:
        if self.first == "left":
            return self.s - self.left
        if self.first == "right":
            return self.right - self.s
        return ZERO

    @property
    def singly_covered(self) -> Fraction:
        return (self.right - self.left) - self.doubly_covered

    @property
    def length(self) -> Fraction:
        return (self.right - self.left) + self.doubly_covered


@dataclass
class PathOutcome:
    feasible: bool
    trajectories: list[CanonicalTrajectory]
    states: list[tuple[Fraction, Fraction]]   # (ell_i, tr_i) for i = 1 .. k+1
    witness: tuple[Fraction, Fraction] = field(default=(ZERO, ZERO))


def embed(inst: Instance) -> PathEmbedding:
    """Lay a (normalized) path instance out on [0, L]."""
    g = inst.graph
    if classify(inst) is not TopologyClass.PATH:
        raise InstanceError("instance is not a path")
    if not inst.on_vertices():
        raise InstanceError("embed needs a normalized instance (agents on vertices)")
    adj = g.adjacency()
    deg = g.degrees()
    start = min(v for v in range(g.n) if deg[v] <= 1)
    order = [start]
    coords = [ZERO]
    pedges = []
    prev_edge = None
    cur = start
    while True:
        nxt = [(eid, y) for eid, y in adj[cur] if eid != prev_edge]
        if not nxt:
            break
        eid, y = nxt[0]
        pedges.append((eid, g.edges[eid].u == cur))
        coords.append(coords[-1] + g.edges[eid].w)
        order.append(y)
        prev_edge, cur = eid, y
    index = {v: t for t, v in enumerate(order)}
    placed = sorted((coords[index[a.at]], a.id, a.at) for a in inst.agents)
    return PathEmbedding(
        tuple(order),
        tuple(coords),
        tuple(pedges),
        tuple(p[1] for p in placed),
        tuple(p[0] for p in placed),
        tuple(p[2] for p in placed),
    )


def solve_path(emb: PathEmbedding, energies: Sequence[Fraction]) -> PathOutcome:
    """Run the greedy sweep; ``energies`` follow ``emb.agent_ids`` order."""
    k = emb.k
    if len(energies) != k:
        raise ValueError("one energy per embedded agent expected")
    s = list(emb.s) + [emb.length]
    ell, tr = ZERO, ZERO
    states = [(ell, tr)]
    trajs: list[CanonicalTrajectory] = []
    for j in range(k):
        sj, nxt, e = s[j], s[j + 1], Fraction(energies[j])
        d = sj - ell
        gap = nxt - sj
        aid = emb.agent_ids[j]
        if tr <= 0:
            need = -tr
            if e < d + need:
                tr_next = e - need - d
                t = CanonicalTrajectory(aid, sj, ell, sj, None, give_left=need,
                                        receive=-tr_next, receive_from="right", case="1.1")
                ell_next = sj
            else:
                ep = e - need
                if ep <= 3 * d:
                    y = min((ep - d) / 2, gap)
                    tr_next = ep - 2 * y - d
                    t = CanonicalTrajectory(aid, sj, ell, sj + y, "right" if y > 0 and d > 0 else None,
                                            give_left=need, give_right=max(tr_next, ZERO), case="1.2.1")
                elif d >= gap:
                    tr_next = ep - 2 * gap - d
                    t = CanonicalTrajectory(aid, sj, ell, nxt, "right" if gap > 0 and d > 0 else None,
                                            give_left=need, give_right=tr_next, case="1.2.2")
                else:
                    reach = min(nxt, sj + ep - 2 * d)
                    tr_next = ep - 2 * d - (reach - sj)
                    t = CanonicalTrajectory(aid, sj, ell, reach, "left" if d > 0 and reach > sj else None,
                                            give_left=need, give_right=tr_next, case="1.2.3")
                ell_next = t.right
        else:
            reach = min(nxt, sj + e + tr)
            tr_next = e + tr - (reach - sj)
            t = CanonicalTrajectory(aid, sj, sj, reach, None, give_right=tr_next,
                                    receive=tr, receive_from="left", case="2")
            ell_next = reach
        trajs.append(t)
        ell, tr = ell_next, tr_next
        states.append((ell, tr))
    feasible = not (ell < emb.length or tr < 0)
    return PathOutcome(feasible, trajs, states, (ell, tr))


def min_energy_prefix(emb: PathEmbedding, energies: Sequence[Fraction], i: int) -> tuple[Fraction, Fraction]:
    """State ``(ell_i, tr_i)`` after the first ``i - 1`` agents (1-based ``i``)."""
    if not 1 <= i <= emb.k + 1:
        raise IndexError(f"agent index {i} outside 1..{emb.k + 1}")
    return solve_path(emb, energies).states[i - 1]


# -- turning coordinates into graph moves -----------------------------------


class _Walker:
    """Emits moves along the embedded path for one agent."""

    def __init__(self, emb: PathEmbedding, g, start_vertex: int):
        self.emb = emb
        self.g = g
        self.index = {v: t for t, v in enumerate(emb.order)}
        self.events: list = []
        self.coord = emb.coords[self.index[start_vertex]]
        # slide left over zero-weight edges to the leftmost vertex at this coordinate
        t = self.index[start_vertex]
        while t > 0 and emb.coords[t - 1] == emb.coords[t]:
            self._edge_move(t - 1, self.coord, self.coord, leftward=True)
            t -= 1
        self._sweep()

    def _leftmost(self, c: Fraction) -> int | None:
        lo, hi = 0, len(self.emb.coords) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.emb.coords[mid] < c:
                lo = mid + 1
            else:
                hi = mid
        return lo if self.emb.coords[lo] == c else None

    def point(self, c: Fraction) -> Point:
        t = self._leftmost(c)
        if t is not None:
            return self.emb.order[t]
        t = self._edge_at(c)
        eid, fwd = self.emb.pedges[t]
        off = c - self.emb.coords[t]
        return (eid, off if fwd else self.g.edges[eid].w - off)

    def _edge_at(self, c: Fraction) -> int:
        coords = self.emb.coords
        lo, hi = 0, len(coords) - 2
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if coords[mid] <= c:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def _edge_move(self, t: int, a: Fraction, b: Fraction, leftward: bool) -> None:
        eid, fwd = self.emb.pedges[t]
        w = self.g.edges[eid].w
        base = self.emb.coords[t]
        oa, ob = a - base, b - base
        if not fwd:
            oa, ob = w - oa, w - ob
        self.events.append(Move(eid, oa, ob, fwd != leftward))

    def _sweep(self) -> None:
        t = self._leftmost(self.coord)
        if t is None:
            return
        end = t
        coords = self.emb.coords
        while end + 1 < len(coords) and coords[end + 1] == coords[t]:
            end += 1
        for u in range(t, end):
            self._edge_move(u, self.coord, self.coord, leftward=False)
        for u in range(end - 1, t - 1, -1):
            self._edge_move(u, self.coord, self.coord, leftward=True)

    def go(self, c: Fraction) -> None:
        x = self.coord
        if c == x:
            return
        coords = self.emb.coords
        t0 = self._leftmost(x)
        if c > x:
            t = t0 if t0 is not None else self._edge_at(x)
            while True:
                self._edge_move(t, max(x, coords[t]), min(c, coords[t + 1]), leftward=False)
                if coords[t + 1] >= c:
                    break
                t += 1
        else:
            t = t0 - 1 if t0 is not None else self._edge_at(x)
            while True:
                self._edge_move(t, min(x, coords[t + 1]), max(c, coords[t]), leftward=True)
                if coords[t] < c or (coords[t] == c and not (t > 0 and coords[t - 1] == c)):
                    break
                t -= 1
        self.coord = c
        self._sweep()


def emit_path_solution(inst: Instance, emb: PathEmbedding, trajectories: Sequence[CanonicalTrajectory]) -> Solution:
    """Build agent event lists from canonical trajectories on ``inst.graph``.

    Transfers happen at the receiver's start coordinate; ``meta["rounds"]``
    records the round in which each agent starts moving (an agent moves
    once its inbound transfer has arrived).
    """
    g = inst.graph
    k = len(trajectories)
    events: dict[int, list] = {}
    for j, t in enumerate(trajectories):
        w = _Walker(emb, g, emb.agent_vertex[j])
        left_id = trajectories[j - 1].agent_id if j > 0 else None
        right_id = trajectories[j + 1].agent_id if j + 1 < k else None

        def give_left():
            if t.give_left > 0:
                w.events.append(Give(left_id, t.give_left, w.point(w.coord)))

        def give_right():
            if t.give_right > 0 and right_id is not None:
                w.events.append(Give(right_id, t.give_right, w.point(w.coord)))

        if t.receive > 0:
            frm = left_id if t.receive_from == "left" else right_id
            w.events.append(Recv(frm, w.point(t.s), t.receive))
        if t.case in ("1.1",):
            w.go(t.left)
            give_left()
        elif t.case in ("1.2.1", "1.2.2"):
            w.go(t.right)
            give_right()
            w.go(t.left)
            give_left()
        elif t.case == "1.2.3":
            w.go(t.left)
            give_left()
            w.go(t.right)
            give_right()
        else:
            w.go(t.right)
            give_right()
        events[t.agent_id] = w.events

    # a receiver starts one round after its donor; transfers from the left
    # chain rightwards and vice versa, so one sweep each way settles all
    r = [1] * k
    for j in range(k):
        if trajectories[j].receive > 0 and trajectories[j].receive_from == "left":
            r[j] = r[j - 1] + 1
    for j in range(k - 1, -1, -1):
        if trajectories[j].receive > 0 and trajectories[j].receive_from != "left":
            r[j] = r[j + 1] + 1
    rounds = {t.agent_id: r[j] for j, t in enumerate(trajectories)}
    return Solution(events, {"rounds": rounds})


def solve_path_instance(inst: Instance) -> SolveResult:
    """Normalize, embed, sweep and emit a solution on the original graph."""
    norm, lift = normalize(inst)
    emb = embed(norm)
    energies = [norm.agent(aid).energy for aid in emb.agent_ids]
    out = solve_path(emb, energies)
    ell, tr = out.witness
    diag = {"frontier": ell, "balance": tr, "length": emb.length}
    if not out.feasible:
        if tr < 0:
            diag["reason"] = f"energy short by {-tr}"
        else:
            diag["reason"] = f"coverage stops at {ell} of {emb.length}"
        return SolveResult("infeasible", "path", None, diag)
    sol = emit_path_solution(norm, emb, out.trajectories)
    sol = lift.solution(sol)
    return SolveResult("feasible", "path", sol, diag)
