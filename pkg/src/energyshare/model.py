"""Core data types: graphs, agents, instances, trajectories and solutions.

All lengths, offsets and energies are :class:`fractions.Fraction` values.
Points on a graph are either a vertex id (``int``) or an ``(edge, offset)``
pair, the offset being measured from the edge's stored ``u`` endpoint.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence, Union

Point = Union[int, tuple]


class InstanceError(ValueError):
    """Raised for malformed or invariant-violating instance/solution input."""


def to_fraction(value: Any, where: str = "value") -> Fraction:
    """Parse a rational given as int, decimal integer string, or ``"p/q"``."""
    if isinstance(value, bool):
        raise InstanceError(f"{where}: expected a rational, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                p, q = text.split("/")
                if int(q) == 0:
                    raise InstanceError(f"{where}: zero denominator in {value!r}")
                return Fraction(int(p), int(q))
            return Fraction(int(text))
        except ValueError:
            raise InstanceError(f"{where}: not a rational: {value!r}") from None
    raise InstanceError(f"{where}: expected a rational, got {type(value).__name__}")


def fmt_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    w: Fraction

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u


@dataclass(frozen=True)
class WeightedGraph:
    n: int
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        for idx, e in enumerate(self.edges):
            if not (0 <= e.u < self.n and 0 <= e.v < self.n):
                raise InstanceError(f"edges[{idx}]: dangling vertex id in ({e.u}, {e.v})")
            if e.u == e.v:
                raise InstanceError(f"edges[{idx}]: self-loop at vertex {e.u}")
            if e.w < 0:
                raise InstanceError(f"edges[{idx}]: negative weight {e.w}")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> Fraction:
        return sum((e.w for e in self.edges), Fraction(0))

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per vertex, the list of ``(edge_id, neighbour)`` in edge order."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for idx, e in enumerate(self.edges):
            adj[e.u].append((idx, e.v))
            adj[e.v].append((idx, e.u))
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        adj = self.adjacency()
        seen = [False] * self.n
        seen[0] = True
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for _, y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    queue.append(y)
        return all(seen)

    def canonical_point(self, p: Point) -> Point:
        """Collapse edge endpoints onto their vertex ids."""
        if isinstance(p, int):
            return p
        eid, off = p
        e = self.edges[eid]
        off = Fraction(off)
        if off == 0:
            return e.u
        if off == e.w:
            return e.v
        return (eid, off)


@dataclass(frozen=True)
class AgentPlacement:
    id: int
    at: Point
    energy: Fraction


@dataclass(frozen=True)
class Instance:
    graph: WeightedGraph
    agents: tuple[AgentPlacement, ...]

    @property
    def k(self) -> int:
        return len(self.agents)

    def agent(self, agent_id: int) -> AgentPlacement:
        for a in self.agents:
            if a.id == agent_id:
                return a
        raise KeyError(agent_id)

    def on_vertices(self) -> bool:
        return all(isinstance(self.graph.canonical_point(a.at), int) for a in self.agents)


class TopologyClass(str, Enum):
    PATH = "Path"
    CYCLE = "Cycle"
    TREE = "Tree"
    EULERIAN = "Eulerian"
    GENERAL = "General"


# -- trajectories -----------------------------------------------------------


@dataclass(frozen=True)
class Move:
    """Travel along ``edge`` from offset ``frm`` to offset ``to``.

    ``forward`` is the travel direction (u to v); it only matters for
    zero-length edges, where the offsets cannot tell the endpoints apart.
    """

    edge: int
    frm: Fraction
    to: Fraction
    forward: bool = True

    @property
    def length(self) -> Fraction:
        return abs(self.to - self.frm)

    def endpoints(self, g: WeightedGraph) -> tuple[Point, Point]:
        e = g.edges[self.edge]
        if e.w == 0:
            return (e.u, e.v) if self.forward else (e.v, e.u)
        return g.canonical_point((self.edge, self.frm)), g.canonical_point((self.edge, self.to))


@dataclass(frozen=True)
class Give:
    to: int
    amount: Fraction
    at: Point


@dataclass(frozen=True)
class Recv:
    frm: int
    at: Point
    # filled in by producers for convenience; the wire format omits it
    amount: Fraction | None = None


Event = Union[Move, Give, Recv]


@dataclass
class Solution:
    events: dict[int, list[Event]]
    meta: dict[str, Any] = field(default_factory=dict)

    def movement(self) -> Fraction:
        return sum(
            (ev.length for evs in self.events.values() for ev in evs if isinstance(ev, Move)),
            Fraction(0),
        )

    def transfers(self) -> list[tuple[int, Give]]:
        return [(a, ev) for a, evs in self.events.items() for ev in evs if isinstance(ev, Give)]


# -- lifting working graphs back to the original ----------------------------


@dataclass(frozen=True)
class Piece:
    """A stretch of an original edge: offsets ``a`` to ``b`` travelled ``forward``."""

    edge: int
    a: Fraction
    b: Fraction
    forward: bool

    @property
    def length(self) -> Fraction:
        return abs(self.b - self.a)


@dataclass(frozen=True)
class Lift:
    """Maps points and moves of a derived (working) graph onto an original one.

    ``edge_pieces[j]`` lists, from working ``u`` to working ``v``, the
    original stretches that working edge ``j`` is made of; an empty list
    marks an artificial zero-weight edge with no original counterpart.
    """

    original: WeightedGraph
    working: WeightedGraph
    vertex_point: tuple[Point, ...]
    edge_pieces: tuple[tuple[Piece, ...], ...]

    @classmethod
    def identity(cls, g: WeightedGraph) -> "Lift":
        return cls(
            g,
            g,
            tuple(range(g.n)),
            tuple((Piece(j, Fraction(0), e.w, True),) for j, e in enumerate(g.edges)),
        )

    def interval(self, edge: int, x: Fraction, y: Fraction, forward: bool | None = None) -> list[Piece]:
        """Original pieces traversed when moving on working ``edge`` from x to y."""
        if forward is None:
            forward = y >= x
        lo, hi = (x, y) if x <= y else (y, x)
        out: list[Piece] = []
        c = Fraction(0)
        total = self.working.edges[edge].w
        for p in self.edge_pieces[edge]:
            ln = p.length
            start, end = max(c, lo), min(c + ln, hi)
            # a zero-length piece sitting at a stop point belongs to the far side
            # of that point (matching ``point``), except at the edge's far end
            if start < end or (ln == 0 and (total == 0 or lo <= c < hi or c == hi == total)):
                sign = 1 if p.b >= p.a else -1
                out.append(Piece(p.edge, p.a + sign * (start - c), p.a + sign * (end - c), p.forward))
            c += ln
        if not forward:
            out = [Piece(p.edge, p.b, p.a, not p.forward) for p in reversed(out)]
        return out

    def point(self, p: Point) -> Point:
        if isinstance(p, int):
            return self.original.canonical_point(self.vertex_point[p])
        eid, x = p
        x = Fraction(x)
        c = Fraction(0)
        for piece in self.edge_pieces[eid]:
            if c <= x <= c + piece.length:
                sign = 1 if piece.b >= piece.a else -1
                return self.original.canonical_point((piece.edge, piece.a + sign * (x - c)))
            c += piece.length
        return self.original.canonical_point(self.vertex_point[self.working.edges[eid].u])

    def then(self, outer: "Lift") -> "Lift":
        """Compose: ``self`` maps onto ``outer.working``; result maps onto ``outer.original``."""
        pieces = []
        for plist in self.edge_pieces:
            acc: list[Piece] = []
            for p in plist:
                acc.extend(outer.interval(p.edge, p.a, p.b, p.forward))
            pieces.append(tuple(acc))
        return Lift(
            outer.original,
            self.working,
            tuple(outer.point(v) for v in self.vertex_point),
            tuple(pieces),
        )

    def solution(self, sol: Solution) -> Solution:
        out: dict[int, list[Event]] = {}
        for agent, evs in sol.events.items():
            lifted: list[Event] = []
            for ev in evs:
                if isinstance(ev, Move):
                    for p in self.interval(ev.edge, ev.frm, ev.to, ev.forward):
                        lifted.append(Move(p.edge, p.a, p.b, p.forward))
                elif isinstance(ev, Give):
                    lifted.append(Give(ev.to, ev.amount, self.point(ev.at)))
                else:
                    lifted.append(Recv(ev.frm, self.point(ev.at), ev.amount))
            out[agent] = lifted
        return Solution(out, dict(sol.meta))


# -- parsing / serialization ------------------------------------------------


def _parse_point(obj: Any, where: str) -> Point:
    if not isinstance(obj, Mapping):
        raise InstanceError(f"{where}: expected an object with 'vertex' or 'edge'")
    if "vertex" in obj:
        v = obj["vertex"]
        if not isinstance(v, int) or isinstance(v, bool):
            raise InstanceError(f"{where}.vertex: expected integer")
        return v
    if "edge" in obj:
        e = obj["edge"]
        if not isinstance(e, int) or isinstance(e, bool):
            raise InstanceError(f"{where}.edge: expected integer")
        return (e, to_fraction(obj.get("offset", 0), f"{where}.offset"))
    raise InstanceError(f"{where}: expected 'vertex' or 'edge'")


def point_to_json(p: Point) -> dict:
    if isinstance(p, int):
        return {"vertex": p}
    return {"edge": p[0], "offset": fmt_fraction(p[1])}


def instance_from_dict(data: Any) -> Instance:
    if not isinstance(data, Mapping):
        raise InstanceError("instance: expected a JSON object")
    g = data.get("graph")
    if not isinstance(g, Mapping):
        raise InstanceError("graph: missing or not an object")
    n = g.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceError("graph.n: expected a positive integer")
    raw_edges = g.get("edges")
    if not isinstance(raw_edges, list):
        raise InstanceError("graph.edges: expected a list")
    edges = []
    for idx, re in enumerate(raw_edges):
        where = f"graph.edges[{idx}]"
        if not isinstance(re, Mapping):
            raise InstanceError(f"{where}: expected an object")
        try:
            u, v = re["u"], re["v"]
        except KeyError as exc:
            raise InstanceError(f"{where}: missing {exc.args[0]!r}") from None
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in (u, v)):
            raise InstanceError(f"{where}: vertex ids must be integers")
        edges.append(Edge(u, v, to_fraction(re.get("w"), f"{where}.w")))
    if not edges:
        raise InstanceError("graph.edges: graph must contain at least one edge")
    graph = WeightedGraph(n, tuple(edges))
    if not graph.is_connected():
        raise InstanceError("graph: disconnected graph")
    raw_agents = data.get("agents")
    if not isinstance(raw_agents, list):
        raise InstanceError("agents: expected a list")
    agents = []
    seen_ids = set()
    for idx, ra in enumerate(raw_agents):
        where = f"agents[{idx}]"
        if not isinstance(ra, Mapping):
            raise InstanceError(f"{where}: expected an object")
        aid = ra.get("id", idx)
        if not isinstance(aid, int) or isinstance(aid, bool) or aid in seen_ids:
            raise InstanceError(f"{where}.id: missing, non-integer or duplicate id")
        seen_ids.add(aid)
        at = _parse_point(ra.get("at"), f"{where}.at")
        if isinstance(at, int):
            if not 0 <= at < n:
                raise InstanceError(f"{where}.at: dangling vertex id {at}")
        else:
            if not 0 <= at[0] < len(edges):
                raise InstanceError(f"{where}.at: dangling edge id {at[0]}")
            if not 0 <= at[1] <= edges[at[0]].w:
                raise InstanceError(f"{where}.at: offset {at[1]} outside edge")
        energy = to_fraction(ra.get("energy"), f"{where}.energy")
        if energy < 0:
            raise InstanceError(f"{where}.energy: negative energy {energy}")
        agents.append(AgentPlacement(aid, graph.canonical_point(at), energy))
    if not agents:
        raise InstanceError("agents: at least one agent is required")
    return Instance(graph, tuple(agents))


def parse_instance(text: str | bytes) -> Instance:
    """Parse the JSON instance format; raises :class:`InstanceError`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return instance_from_dict(data)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "graph": {
            "n": inst.graph.n,
            "edges": [{"u": e.u, "v": e.v, "w": fmt_fraction(e.w)} for e in inst.graph.edges],
        },
        "agents": [
            {"id": a.id, "at": point_to_json(a.at), "energy": fmt_fraction(a.energy)}
            for a in inst.agents
        ],
    }


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


def solution_to_dict(sol: Solution) -> dict:
    agents = []
    for aid in sorted(sol.events):
        evs = []
        for ev in sol.events[aid]:
            if isinstance(ev, Move):
                evs.append({"move": {"edge": ev.edge, "dir": "uv" if ev.forward else "vu",
                                     "from": fmt_fraction(ev.frm), "to": fmt_fraction(ev.to)}})
            elif isinstance(ev, Give):
                evs.append({"give": {"to": ev.to, "amount": fmt_fraction(ev.amount),
                                     "at": point_to_json(ev.at)}})
            else:
                evs.append({"recv": {"from": ev.frm, "at": point_to_json(ev.at)}})
        agents.append({"id": aid, "events": evs})
    return {"agents": agents}


def serialize_solution(sol: Solution) -> str:
    return json.dumps(solution_to_dict(sol), indent=1)


def solution_from_dict(data: Any) -> Solution:
    if not isinstance(data, Mapping) or not isinstance(data.get("agents"), list):
        raise InstanceError("solution: expected an object with an 'agents' list")
    events: dict[int, list[Event]] = {}
    for idx, ra in enumerate(data["agents"]):
        where = f"agents[{idx}]"
        if not isinstance(ra, Mapping) or not isinstance(ra.get("id"), int):
            raise InstanceError(f"{where}: expected an object with integer 'id'")
        evs: list[Event] = []
        for j, re in enumerate(ra.get("events", [])):
            w = f"{where}.events[{j}]"
            if not isinstance(re, Mapping) or len(re) != 1:
                raise InstanceError(f"{w}: expected a single-key event object")
            kind, body = next(iter(re.items()))
            if not isinstance(body, Mapping):
                raise InstanceError(f"{w}: event body must be an object")
            if kind == "move":
                d = body.get("dir", "uv")
                if d not in ("uv", "vu"):
                    raise InstanceError(f"{w}.dir: expected 'uv' or 'vu'")
                if not isinstance(body.get("edge"), int):
                    raise InstanceError(f"{w}.edge: expected integer")
                evs.append(Move(body["edge"], to_fraction(body.get("from"), f"{w}.from"),
                                to_fraction(body.get("to"), f"{w}.to"), d == "uv"))
            elif kind == "give":
                if not isinstance(body.get("to"), int):
                    raise InstanceError(f"{w}.to: expected integer")
                evs.append(Give(body["to"], to_fraction(body.get("amount"), f"{w}.amount"),
                                _parse_point(body.get("at"), f"{w}.at")))
            elif kind == "recv":
                if not isinstance(body.get("from"), int):
                    raise InstanceError(f"{w}.from: expected integer")
                evs.append(Recv(body["from"], _parse_point(body.get("at"), f"{w}.at")))
            else:
                raise InstanceError(f"{w}: unknown event kind {kind!r}")
        events[ra["id"]] = evs
    return Solution(events)


def parse_solution(text: str | bytes) -> Solution:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return solution_from_dict(data)


# -- instance operations ----------------------------------------------------


def normalize(inst: Instance) -> tuple[Instance, Lift]:
    """Subdivide edges so that every agent sits on a vertex.

    Returns the normalized instance and the :class:`Lift` mapping it back
    onto ``inst.graph``; an instance already on vertices comes back as is.
    """
    g = inst.graph
    if inst.on_vertices():
        return inst, Lift.identity(g)
    cuts: dict[int, set[Fraction]] = {}
    for a in inst.agents:
        p = g.canonical_point(a.at)
        if not isinstance(p, int):
            cuts.setdefault(p[0], set()).add(Fraction(p[1]))
    n = g.n
    edges: list[Edge] = list(g.edges)
    pieces: list[tuple[Piece, ...]] = [(Piece(j, Fraction(0), e.w, True),) for j, e in enumerate(g.edges)]
    vertex_point: list[Point] = list(range(g.n))
    where: dict[tuple[int, Fraction], int] = {}
    for eid in sorted(cuts):
        e = g.edges[eid]
        offs = sorted(cuts[eid])
        chain = [e.u]
        for off in offs:
            where[(eid, off)] = n
            vertex_point.append((eid, off))
            chain.append(n)
            n += 1
        chain.append(e.v)
        bounds = [Fraction(0)] + offs + [e.w]
        for t in range(len(chain) - 1):
            seg = Edge(chain[t], chain[t + 1], bounds[t + 1] - bounds[t])
            piece = (Piece(eid, bounds[t], bounds[t + 1], True),)
            if t == 0:
                edges[eid] = seg
                pieces[eid] = piece
            else:
                edges.append(seg)
                pieces.append(piece)
    new_g = WeightedGraph(n, tuple(edges))
    agents = []
    for a in inst.agents:
        p = g.canonical_point(a.at)
        at = p if isinstance(p, int) else where[(p[0], Fraction(p[1]))]
        agents.append(AgentPlacement(a.id, at, a.energy))
    return Instance(new_g, tuple(agents)), Lift(g, new_g, tuple(vertex_point), tuple(pieces))


def classify(inst: Instance | WeightedGraph) -> TopologyClass:
    g = inst.graph if isinstance(inst, Instance) else inst
    deg = g.degrees()
    connected = g.is_connected()
    acyclic = connected and g.m == g.n - 1
    if acyclic and max(deg) <= 2:
        return TopologyClass.PATH
    if connected and all(d == 2 for d in deg):
        return TopologyClass.CYCLE
    if acyclic:
        return TopologyClass.TREE
    if connected and all(d % 2 == 0 for d in deg):
        return TopologyClass.EULERIAN
    return TopologyClass.GENERAL


def totals(inst: Instance) -> tuple[Fraction, Fraction]:
    """Total edge weight and total initial energy."""
    return inst.graph.total_weight, sum((a.energy for a in inst.agents), Fraction(0))


def make_instance(
    n: int,
    edges: Iterable[tuple[int, int, Any]],
    agents: Sequence[tuple[Point, Any]],
) -> Instance:
    """Convenience constructor: ``agents`` are ``(position, energy)`` pairs, ids 0..k-1."""
    g = WeightedGraph(n, tuple(Edge(u, v, to_fraction(w)) for u, v, w in edges))
    if not g.edges:
        raise InstanceError("graph must contain at least one edge")
    if not g.is_connected():
        raise InstanceError("graph: disconnected graph")
    placed = []
    for i, (at, en) in enumerate(agents):
        if not isinstance(at, int):
            at = (at[0], to_fraction(at[1]))
        energy = to_fraction(en)
        if energy < 0:
            raise InstanceError(f"agents[{i}]: negative energy")
        placed.append(AgentPlacement(i, g.canonical_point(at), energy))
    if not placed:
        raise InstanceError("agents: at least one agent is required")
    return Instance(g, tuple(placed))


@dataclass
class SolveResult:
    """Outcome of a solver: ``verdict`` is feasible, infeasible or unknown."""

    verdict: str
    method: str
    solution: Solution | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"
