"""Cycles and Eulerian graphs, plus edge doubling for everything else.

On an Euler circuit a single collector suffices: start it where the
running balance of collected energy minus distance never dips below
zero (the gas-station argument) and let it pick up every other agent's
energy as it passes.  Doubling every edge makes any connected graph
Eulerian at twice the cost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import (
    AgentPlacement,
    Edge,
    Event,
    Give,
    Instance,
    InstanceError,
    Lift,
    Move,
    Piece,
    Recv,
    Solution,
    SolveResult,
    WeightedGraph,
    normalize,
    totals,
)


class NotEulerianError(InstanceError):
    pass


@dataclass(frozen=True)
class EulerCircuit:
    graph: WeightedGraph
    # (edge id, tail vertex, head vertex) in travel order; closes at steps[0] tail
    steps: tuple[tuple[int, int, int], ...]

    @property
    def length(self) -> Fraction:
        return sum((self.graph.edges[e].w for e, _, _ in self.steps), Fraction(0))

    @property
    def start(self) -> int:
        return self.steps[0][1]

    def anchor(self, vertex: int) -> int:
        """Index of the first step leaving ``vertex``."""
        for t, (_, tail, _) in enumerate(self.steps):
            if tail == vertex:
                return t
        raise KeyError(vertex)


@dataclass
class RelayPlan:
    start: int                      # position in ``anchors`` where the collector starts
    anchors: list[int]              # occupied circuit indices, increasing
    gains: list[Fraction]           # energy picked up at each anchor
    distances: list[Fraction]       # from each anchor to the next, cyclically
    ledger: list[Fraction] = field(default_factory=list)

    @property
    def surplus(self) -> Fraction:
        return sum(self.gains, Fraction(0)) - sum(self.distances, Fraction(0))


def euler_circuit(g: WeightedGraph) -> EulerCircuit:
    """Hierholzer's algorithm, always taking the smallest unused edge id."""
    if not g.is_connected():
        raise NotEulerianError("graph is disconnected")
    odd = [v for v, d in enumerate(g.degrees()) if d % 2]
    if odd:
        raise NotEulerianError(f"odd degree at vertices {odd[:5]}")
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for j, e in enumerate(g.edges):
        adj[e.u].append(j)
        adj[e.v].append(j)
    ptr = [0] * g.n
    used = [False] * g.m
    start = g.edges[0].u
    stack: list[tuple[int, int]] = [(start, -1)]
    rev: list[tuple[int, int]] = []  # (vertex reached, edge used) in reverse
    while stack:
        v, _ = stack[-1]
        lst = adj[v]
        while ptr[v] < len(lst) and used[lst[ptr[v]]]:
            ptr[v] += 1
        if ptr[v] == len(lst):
            rev.append(stack.pop())
            continue
        j = lst[ptr[v]]
        used[j] = True
        e = g.edges[j]
        stack.append((e.v if e.u == v else e.u, j))
    rev.reverse()
    steps = []
    for (a, _), (b, j) in zip(rev, rev[1:]):
        steps.append((j, a, b))
    return EulerCircuit(g, tuple(steps))


def plan_relay(circuit: EulerCircuit, agents: Sequence[AgentPlacement]) -> RelayPlan:
    """Group agents by anchor and pick the smallest valid start, if any."""
    g = circuit.graph
    gain: dict[int, Fraction] = {}
    for a in agents:
        t = circuit.anchor(a.at)
        gain[t] = gain.get(t, Fraction(0)) + a.energy
    anchors = sorted(gain)
    cum = [Fraction(0)]
    for e, _, _ in circuit.steps:
        cum.append(cum[-1] + g.edges[e].w)
    L = cum[-1]
    K = len(anchors)
    dist = [cum[anchors[i + 1]] - cum[anchors[i]] for i in range(K - 1)]
    dist.append(L - cum[anchors[-1]] + cum[anchors[0]])
    gains = [gain[t] for t in anchors]
    plan = RelayPlan(-1, anchors, gains, dist)
    if plan.surplus < 0:
        return plan
    # P[j] = balance after the first j legs when starting at anchor 0
    P = [Fraction(0)]
    for x, d in zip(gains, dist):
        P.append(P[-1] + x - d)
    total = P[-1]
    suf = [P[K]] * (K + 1)
    for j in range(K - 1, -1, -1):
        suf[j] = min(P[j + 1], suf[j + 1])
    pre = P[1]
    for s in range(K):
        if s > 0:
            pre = min(pre, P[s])
        if suf[s] >= P[s] and (s == 0 or total + pre >= P[s]):
            plan.start = s
            break
    s = plan.start
    bal = Fraction(0)
    for i in range(K):
        q = (s + i) % K
        bal += gains[q] - dist[q]
        plan.ledger.append(bal)
    return plan


def _traverse(g: WeightedGraph, edge: int, tail: int) -> Move:
    e = g.edges[edge]
    if e.u == tail:
        return Move(edge, Fraction(0), e.w, True)
    return Move(edge, e.w, Fraction(0), False)


def solve_cycle_on_circuit(circuit: EulerCircuit, agents: Sequence[AgentPlacement]) -> tuple[Solution | None, RelayPlan]:
    """Single-collector relay along ``circuit``; ``None`` when energy falls short."""
    plan = plan_relay(circuit, agents)
    if plan.start < 0:
        return None, plan
    g = circuit.graph
    at_anchor: dict[int, list[AgentPlacement]] = {}
    for a in agents:
        at_anchor.setdefault(circuit.anchor(a.at), []).append(a)
    first = plan.anchors[plan.start]
    collector = min(at_anchor[first], key=lambda a: a.id).id
    events: dict[int, list[Event]] = {a.id: [] for a in agents}
    m = len(circuit.steps)
    mine = events[collector]
    for i in range(m):
        t = (first + i) % m
        for a in sorted(at_anchor.get(t, ()), key=lambda a: a.id):
            if a.id == collector or a.energy == 0:
                continue
            events[a.id].append(Give(collector, a.energy, a.at))
            mine.append(Recv(a.id, a.at, a.energy))
        e, tail, _ = circuit.steps[t]
        mine.append(_traverse(g, e, tail))
    meta = {
        "collector": collector,
        "start_vertex": circuit.steps[first][1],
        "ledger": [str(x) for x in plan.ledger],
    }
    return Solution(events, meta), plan


def solve_eulerian(inst: Instance, method: str = "euler") -> SolveResult:
    """Exact: feasible iff the total energy covers the total edge weight."""
    norm, lift = normalize(inst)
    circuit = euler_circuit(norm.graph)
    W, E = totals(inst)
    sol, plan = solve_cycle_on_circuit(circuit, norm.agents)
    diag = {"length": circuit.length, "energy": E, "surplus": plan.surplus}
    if sol is None:
        diag["reason"] = f"energy short by {W - E}"
        return SolveResult("infeasible", method, None, diag)
    sol.meta["method"] = method
    return SolveResult("feasible", method, lift.solution(sol), diag)


def doubled(g: WeightedGraph) -> tuple[WeightedGraph, Lift]:
    """Every edge twice; copy ``m + j`` lifts back onto edge ``j``."""
    edges = tuple(g.edges) + tuple(Edge(e.u, e.v, e.w) for e in g.edges)
    g2 = WeightedGraph(g.n, edges)
    pieces = tuple((Piece(j % g.m, Fraction(0), e.w, True),) for j, e in enumerate(edges))
    return g2, Lift(g, g2, tuple(range(g.n)), pieces)


def solve_by_doubling(inst: Instance) -> SolveResult:
    """Infeasible below W, feasible from 2W on, undecided in between."""
    W, E = totals(inst)
    diag = {"weight": W, "energy": E}
    if E < W:
        diag["reason"] = f"energy short by {W - E}"
        return SolveResult("infeasible", "double", None, diag)
    if E < 2 * W:
        diag["reason"] = "energy between W and 2W: the general decision is NP-hard"
        return SolveResult("unknown", "double", None, diag)
    norm, lift0 = normalize(inst)
    g2, lift2 = doubled(norm.graph)
    sol, plan = solve_cycle_on_circuit(euler_circuit(g2), norm.agents)
    assert sol is not None, "2W always suffices on the doubled circuit"
    sol.meta["method"] = "double"
    diag["surplus"] = plan.surplus
    return SolveResult("feasible", "double", lift2.then(lift0).solution(sol), diag)
