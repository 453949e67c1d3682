"""Instance corpus: hardness gadgets, seeded random instances, named examples."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .model import (
    AgentPlacement,
    Edge,
    Event,
    Give,
    Instance,
    Move,
    Recv,
    Solution,
    TopologyClass,
    WeightedGraph,
    classify,
    make_instance,
)


class GeneratorError(ValueError):
    pass


# -- meta-edge gadgets --------------------------------------------------------


@dataclass(frozen=True)
class GadgetParams:
    a: Fraction
    b: Fraction
    eps: Fraction
    initial_vertex: int = 0

    @classmethod
    def default(cls, n: int, initial_vertex: int = 0) -> "GadgetParams":
        b = Fraction(1)
        return cls(5 * n * b + 1, b, b / (3 * n + 1), initial_vertex)

    def check(self, n: int) -> None:
        if not self.a > 5 * n * self.b:
            raise GeneratorError(f"need a > 5nb = {5 * n * self.b}, got a = {self.a}")
        if not 0 < self.eps < self.b / (3 * n):
            raise GeneratorError(f"need 0 < eps < b/(3n) = {self.b / (3 * n)}, got {self.eps}")
        if not 0 <= self.initial_vertex < n:
            raise GeneratorError(f"initial vertex {self.initial_vertex} out of range")


@dataclass(frozen=True)
class Gadget:
    """Images of one source edge ``(u, v)``; whisker ``tips[0]`` sits on the u side by convention."""

    source_edge: int
    u: int
    v: int
    center: int
    tips: tuple[int, int]
    spine: tuple[int, int]     # edge ids m(u)-w and w-m(v)
    whiskers: tuple[int, int]  # edge ids w-tips[0] and w-tips[1]


@dataclass
class GadgetInstance:
    instance: Instance
    source: WeightedGraph
    params: GadgetParams
    variant: str
    gadgets: list[Gadget]

    def meta_vertex(self, v: int) -> int:
        return v  # source vertex ids are kept for meta-vertices

    def sidecar(self) -> dict:
        return {
            "variant": self.variant,
            "params": {"a": str(self.params.a), "b": str(self.params.b), "eps": str(self.params.eps),
                       "initial_vertex": self.params.initial_vertex},
            "meta_vertices": {str(v): v for v in range(self.source.n)},
            "gadgets": [
                {"source_edge": gd.source_edge, "u": gd.u, "v": gd.v, "center": gd.center,
                 "tips": list(gd.tips), "spine_edges": list(gd.spine), "whisker_edges": list(gd.whiskers)}
                for gd in self.gadgets
            ],
        }


VARIANTS = ("published", "repaired")


def gen_gadget(g3: WeightedGraph, params: GadgetParams | None = None, variant: str = "published") -> GadgetInstance:
    """Replace every edge of a 3-regular graph by a meta-edge gadget.

    ``variant="published"`` uses the published energies, where the initial
    meta-vertex holds 3a+5b+2n*eps.  That leaves the explorer eps short of
    its last light half, so ``"repaired"`` adds one more eps there.
    """
    n = g3.n
    if not g3.is_connected() or any(d != 3 for d in g3.degrees()):
        raise GeneratorError("source graph must be connected and 3-regular")
    if variant not in VARIANTS:
        raise GeneratorError(f"unknown variant {variant!r}")
    params = params or GadgetParams.default(n)
    params.check(n)
    a, b, eps, s = params.a, params.b, params.eps, params.initial_vertex
    edges: list[Edge] = []
    gadgets = []
    nxt = n
    for j, e in enumerate(g3.edges):
        w, t0, t1 = nxt, nxt + 1, nxt + 2
        nxt += 3
        wu = a + eps * n if e.u == s else a
        wv = a + eps * n if e.v == s else a
        base = len(edges)
        edges += [Edge(e.u, w, wu), Edge(w, e.v, wv), Edge(w, t0, b), Edge(w, t1, b)]
        gadgets.append(Gadget(j, e.u, e.v, w, (t0, t1), (base, base + 1), (base + 2, base + 3)))
    graph = WeightedGraph(nxt, tuple(edges))
    regular = 3 * a + 5 * b + eps
    first = 3 * a + 5 * b + (2 * n + (1 if variant == "repaired" else 0)) * eps
    agents = tuple(AgentPlacement(v, v, first if v == s else regular) for v in range(n))
    return GadgetInstance(Instance(graph, agents), g3, params, variant, gadgets)


def _fwd(g: WeightedGraph, edge: int, tail: int) -> Move:
    e = g.edges[edge]
    if e.u == tail:
        return Move(edge, Fraction(0), e.w, True)
    return Move(edge, e.w, Fraction(0), False)


def _back(g: WeightedGraph, edge: int, tail: int) -> list[Move]:
    """Out along ``edge`` from ``tail`` and straight back."""
    m = _fwd(g, edge, tail)
    return [m, Move(edge, m.to, m.frm, not m.forward)]


def hamiltonian_witness_schedule(gi: GadgetInstance, ham_cycle: Sequence[int]) -> Solution:
    """Explorer follows the cycle over heavy gadgets; the rest halve the light ones.

    ``meta["explorer_residual"]`` is the explorer's energy when it is back at
    the initial meta-vertex, before it walks its own light half.
    """
    src = gi.source
    n = src.n
    cyc = list(ham_cycle)
    if len(cyc) == n + 1 and cyc[0] == cyc[-1]:
        cyc.pop()
    s = gi.params.initial_vertex
    if len(cyc) != n or sorted(cyc) != list(range(n)):
        raise GeneratorError("not a Hamiltonian vertex sequence")
    if cyc[0] != s:
        raise GeneratorError(f"cycle must start at the initial vertex {s}")
    by_pair: dict[frozenset, list[Gadget]] = {}
    for gd in gi.gadgets:
        by_pair.setdefault(frozenset((gd.u, gd.v)), []).append(gd)
    heavy: list[tuple[Gadget, int]] = []
    taken: set[int] = set()
    for x, y in zip(cyc, cyc[1:] + cyc[:1]):
        options = [gd for gd in by_pair.get(frozenset((x, y)), []) if gd.source_edge not in taken]
        if not options:
            raise GeneratorError(f"{x}-{y} is not an edge of the source graph")
        heavy.append((options[0], x))
        taken.add(options[0].source_edge)
    g = gi.instance.graph
    a, b, eps = gi.params.a, gi.params.b, gi.params.eps
    energy = {ag.id: ag.energy for ag in gi.instance.agents}
    events: dict[int, list[Event]] = {v: [] for v in range(n)}
    light_half: dict[int, list[Move]] = {}
    for gd in gi.gadgets:
        if gd.source_edge in taken:
            continue
        light_half[gd.u] = [_fwd(g, gd.spine[0], gd.u), _fwd(g, gd.whiskers[0], gd.center)]
        light_half[gd.v] = [_fwd(g, gd.spine[1], gd.v), _fwd(g, gd.whiskers[1], gd.center)]
    explorer = events[s]
    fuel = energy[s]
    for gd, tail in heavy:
        near, far = (0, 1) if tail == gd.u else (1, 0)
        walk = [_fwd(g, gd.spine[near], tail)]
        walk += _back(g, gd.whiskers[0], gd.center) + _back(g, gd.whiskers[1], gd.center)
        walk.append(_fwd(g, gd.spine[far], gd.center))
        explorer += walk
        fuel -= sum((m.length for m in walk), Fraction(0))
        head = gd.v if tail == gd.u else gd.u
        if head == s:
            break
        give = 2 * a + 4 * b + eps
        events[head].append(Give(s, give, head))
        explorer.append(Recv(head, head, give))
        fuel += give
        events[head] += light_half[head]
    residual = fuel
    explorer += light_half[s]
    return Solution(events, {"method": "gadget-witness", "explorer_residual": residual,
                             "variant": gi.variant})


def k4() -> WeightedGraph:
    return WeightedGraph(4, tuple(Edge(u, v, Fraction(1)) for u, v in
                                  [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]))


def prism() -> WeightedGraph:
    """Triangular prism: triangles 0-1-2 and 3-4-5 joined by rungs."""
    pairs = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]
    return WeightedGraph(6, tuple(Edge(u, v, Fraction(1)) for u, v in pairs))


# -- random instances ---------------------------------------------------------


def _weight(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 12), rng.choice((1, 2, 3, 4)))


def _tree_pairs(rng: random.Random, n: int) -> list[tuple[int, int]]:
    return [(rng.randrange(v), v) for v in range(1, n)]


def _graph_pairs(rng: random.Random, cls: TopologyClass, n: int) -> list[tuple[int, int]]:
    if cls is TopologyClass.PATH:
        return [(v, v + 1) for v in range(n - 1)]
    if cls is TopologyClass.CYCLE:
        order = list(range(n))
        rng.shuffle(order)
        return [(order[i], order[(i + 1) % n]) for i in range(n)]
    if cls is TopologyClass.TREE:
        return _tree_pairs(rng, n)
    if cls is TopologyClass.EULERIAN:
        order = list(range(n))
        rng.shuffle(order)
        pairs = [(order[i], order[(i + 1) % n]) for i in range(n)]
        for _ in range(rng.randint(1, max(1, n // 2))):
            size = rng.randint(2, min(n, 4))
            loop = rng.sample(range(n), size)
            pairs += [(loop[i], loop[(i + 1) % size]) for i in range(size)]
        return pairs
    pairs = _tree_pairs(rng, n)
    for _ in range(rng.randint(1, n)):
        u, v = rng.sample(range(n), 2)
        pairs.append((u, v))
    return pairs


def gen_random(seed: int, cls: TopologyClass | str, n: int, k: int, ratio: Fraction | int | str) -> Instance:
    """Seeded instance of class ``cls`` whose total energy is exactly ``ratio * W``."""
    cls = TopologyClass(cls)
    ratio = Fraction(ratio)
    if n < 2 or k < 1:
        raise GeneratorError("need n >= 2 and k >= 1")
    if ratio < 0:
        raise GeneratorError("ratio must be non-negative")
    if cls is TopologyClass.TREE and n < 4:
        raise GeneratorError("a tree that is not a path needs n >= 4")
    if cls is TopologyClass.GENERAL and n < 2:
        raise GeneratorError("general graphs need n >= 2")
    rng = random.Random(seed)
    for _ in range(1000):
        pairs = _graph_pairs(rng, cls, n)
        g = WeightedGraph(n, tuple(Edge(u, v, _weight(rng)) for u, v in pairs))
        if g.is_connected() and classify(g) is cls:
            break
    else:
        raise GeneratorError(f"could not draw a {cls.value} graph with n={n}")
    total = ratio * g.total_weight
    shares = [rng.randint(1, 10) for _ in range(k)]
    energies = [total * x / sum(shares) for x in shares]
    agents: list[tuple] = []
    for en in energies:
        if rng.random() < 0.25:
            j = rng.randrange(g.m)
            agents.append(((j, g.edges[j].w * Fraction(rng.randint(1, 3), 4)), en))
        else:
            agents.append((rng.randrange(n), en))
    return make_instance(n, [(e.u, e.v, e.w) for e in g.edges], agents)


# -- named examples -----------------------------------------------------------


@dataclass
class CorpusEntry:
    instance: Instance
    expected: str         # "feasible" or "infeasible"
    solver: str           # method that decides it
    note: str = ""
    extra: dict = field(default_factory=dict)


def _path(n: int, agents: list[tuple], w: Fraction | int = 1) -> Instance:
    return make_instance(n, [(v, v + 1, w) for v in range(n - 1)], agents)


def caterpillar(spine: int, k: int, seed: int = 0, ratio: Fraction | int = 2) -> Instance:
    """Spine ``0..spine-1`` with one leg per spine vertex; ``2 * spine`` nodes.

    The ``k`` agents sit on random nodes and share ``ratio * W`` equally.
    """
    rng = random.Random(seed)
    edges = [(i, i + 1, rng.randint(1, 5)) for i in range(spine - 1)]
    edges += [(i, spine + i, rng.randint(1, 5)) for i in range(spine)]
    W = sum(w for *_, w in edges)
    agents = [(rng.randrange(2 * spine), Fraction(ratio) * W / k) for _ in range(k)]
    return make_instance(2 * spine, edges, agents)


def star(leaves: int, agents: list[tuple]) -> Instance:
    """Unit star, center 0 and leaves 1..leaves."""
    return make_instance(leaves + 1, [(0, v, 1) for v in range(1, leaves + 1)], agents)


def star_e1(k: int, center: Fraction | int) -> Instance:
    return star(2 * k, [(0, center)] + [(v, 0) for v in range(1, k + 1)])


def star_e2(k: int) -> Instance:
    return star(2 * k, [(0, 0)] + [(v, 2) for v in range(1, k + 1)])


def reference_corpus() -> dict[str, CorpusEntry]:
    F = Fraction
    out: dict[str, CorpusEntry] = {}
    out["intro-4path-22"] = CorpusEntry(_path(4, [(1, 2), (2, 2)]), "feasible", "path")
    out["intro-4path-short"] = CorpusEntry(_path(4, [(1, 2), (2, F(19, 10))]), "infeasible", "path")
    out["intro-4path-eps"] = CorpusEntry(_path(4, [(1, F(31, 10)), (2, F(9, 10))]), "feasible", "path",
                                         "one tenth flows to the right agent")
    out["intro-4path-endpoints"] = CorpusEntry(_path(4, [(0, F(3, 2)), (3, F(3, 2))]), "feasible", "path",
                                               "total energy 3 suffices from the ends")
    out["segment-midpoint"] = CorpusEntry(make_instance(2, [(0, 1, 1)], [((0, F(1, 2)), F(3, 2))]),
                                          "feasible", "path")
    out["segment-midpoint-minus"] = CorpusEntry(
        make_instance(2, [(0, 1, 1)], [((0, F(1, 2)), F(3, 2) - F(1, 10**6))]), "infeasible", "path")
    for k in (1, 2, 3, 4):
        out[f"star-k{k}-E1"] = CorpusEntry(star_e1(k, 4 * k - 1), "feasible", "tree")
        out[f"star-k{k}-E1-minus"] = CorpusEntry(star_e1(k, 4 * k - 1 - F(1, 10)), "infeasible", "tree")
        out[f"star-k{k}-E2"] = CorpusEntry(star_e2(k), "feasible", "tree")
    # partition {1, 1, 2}: T = 2, two agents at the center
    part = [(0, v, w) for v, w in enumerate([F(1, 2), F(1, 2), F(1), F(2), F(2)], start=1)]
    out["star-partition"] = CorpusEntry(make_instance(6, part, [(0, 4), (0, 4)]), "feasible", "tree",
                                        "2T per agent")
    out["star-partition-minus"] = CorpusEntry(make_instance(6, part, [(0, F(39, 10)), (0, F(39, 10))]),
                                              "infeasible", "tree")
    tri = [(0, 1, 1), (1, 2, 1), (2, 0, 1)]
    out["triangle-one-agent"] = CorpusEntry(make_instance(3, tri, [(0, 3)]), "feasible", "cycle")
    out["triangle-one-agent-minus"] = CorpusEntry(make_instance(3, tri, [(0, F(29, 10))]), "infeasible", "cycle")
    out["double-edge-relay"] = CorpusEntry(make_instance(2, [(0, 1, 1), (0, 1, 1)], [(0, 1), (1, 1)]),
                                           "feasible", "euler")
    out["star-k2-double"] = CorpusEntry(star(4, [(0, 8)]), "feasible", "double")
    return out
