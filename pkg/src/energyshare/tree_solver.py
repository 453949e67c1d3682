"""Trees: surplus tables over agent balances, bottom-up.

The input tree is first reshaped into a rooted binary tree whose agents
all sit at leaves (pendant zero-weight leaves for interior agents,
zero-weight splits of high-degree vertices, collapsed degree-2 chains,
and a root at the midpoint of one edge).  For every vertex ``v`` and
balance ``i`` (agents leaving the subtree, negative when entering),
``B[v, i]`` is the largest energy surplus the explored subtree can hand
out; ``B[e, i]`` is the same measured above the edge ``e`` to ``v``'s
parent.  The tree is explorable iff some root entry with ``i >= 0`` is
non-negative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import kernels
from .model import (
    Edge,
    Give,
    Instance,
    InstanceError,
    Lift,
    Move,
    Piece,
    Point,
    Recv,
    Solution,
    SolveResult,
    TopologyClass,
    WeightedGraph,
    classify,
    fmt_fraction,
    normalize,
)

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _Q = Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(int(x.numerator), int(x.denominator))


# -- preprocessing ------------------------------------------------------------


@dataclass
class RootedBinaryTree:
    """Binary tree with agents at leaves; vertex ``v != root`` hangs below
    ``parent[v]`` by working edge ``edge_of[v]`` of weight ``weight[v]``."""

    root: int
    parent: list[int]
    children: list[tuple[int, ...]]
    weight: list[Fraction]
    edge_of: list[int]
    agents_at: list[tuple[int, ...]]
    energy_at: list[Fraction]
    lift: Lift
    order: list[int] = field(default_factory=list)  # post-order
    count: list[int] = field(default_factory=list)  # a_v
    split_choices: int = 1  # edges of the reshaped tree usable as root_edge

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def k(self) -> int:
        return self.count[self.root]

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]


def _reverse(pieces: list[Piece]) -> list[Piece]:
    return [Piece(p.edge, p.b, p.a, not p.forward) for p in reversed(pieces)]


def _split(pieces: list[Piece], x: Fraction) -> tuple[list[Piece], list[Piece]]:
    """Cut a piece list at distance ``x``; zero pieces at the cut go right."""
    left: list[Piece] = []
    right: list[Piece] = []
    c = Fraction(0)
    for p in pieces:
        ln = p.length
        if c + ln <= x and not (ln == 0 and c == x):
            left.append(p)
        elif c >= x:
            right.append(p)
        else:
            sign = 1 if p.b >= p.a else -1
            mid = p.a + sign * (x - c)
            left.append(Piece(p.edge, p.a, mid, p.forward))
            right.append(Piece(p.edge, mid, p.b, p.forward))
        c += ln
    return left, right


def preprocess(inst: Instance, root_edge: int | None = None) -> RootedBinaryTree:
    """Reshape a tree instance (agents on vertices) into a rooted binary tree.

    ``root_edge`` picks which edge of the reshaped, unrooted tree is split
    for the root (taken modulo the edge count; default 0).
    """
    g = inst.graph
    if classify(g) not in (TopologyClass.PATH, TopologyClass.TREE):
        raise InstanceError("not a tree")
    if not inst.on_vertices():
        raise ValueError("preprocess expects agents on vertices; normalize first")

    vpoint: list[Point] = list(range(g.n))
    agents: list[list[int]] = [[] for _ in range(g.n)]
    for a in sorted(inst.agents, key=lambda a: a.id):
        agents[a.at].append(a.id)
    ends: dict[int, list] = {}
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for j, e in enumerate(g.edges):
        ends[j] = [e.u, e.v, e.w, [Piece(j, Fraction(0), e.w, True)]]
        adj[e.u].append(j)
        adj[e.v].append(j)
    next_edge = g.m

    def new_node(point: Point) -> int:
        vpoint.append(point)
        agents.append([])
        adj.append([])
        return len(vpoint) - 1

    def new_edge(a: int, b: int, w: Fraction, pieces: list[Piece]) -> int:
        nonlocal next_edge
        j = next_edge
        next_edge += 1
        ends[j] = [a, b, w, pieces]
        adj[a].append(j)
        adj[b].append(j)
        return j

    def reattach(j: int, old: int, new: int) -> None:
        rec = ends[j]
        if rec[0] == old:
            rec[0] = new
        else:
            rec[1] = new
        adj[old].remove(j)
        adj[new].append(j)

    # (a) interior agents move to a pendant zero-weight leaf
    for v in range(g.n):
        if agents[v] and len(adj[v]) >= 2:
            leaf = new_node(vpoint[v])
            agents[leaf], agents[v] = agents[v], []
            new_edge(v, leaf, Fraction(0), [])
    # (b) split vertices of degree above three into a zero-weight spine
    for v in range(len(vpoint)):
        if len(adj[v]) <= 3:
            continue
        extra = sorted(adj[v])[2:]
        cur = v
        while len(extra) > 2:
            nxt = new_node(vpoint[v])
            new_edge(cur, nxt, Fraction(0), [])
            reattach(extra.pop(0), v, nxt)
            cur = nxt
        last = new_node(vpoint[v])
        new_edge(cur, last, Fraction(0), [])
        for jj in extra:
            reattach(jj, v, last)
    # (c) collapse degree-2 chains
    for x in range(len(vpoint)):
        if len(adj[x]) != 2 or agents[x]:
            continue
        j1, j2 = adj[x]
        a1, b1, w1, p1 = ends.pop(j1)
        a2, b2, w2, p2 = ends.pop(j2)
        # orient j1 as p -> x and j2 as x -> q
        if b1 == x:
            p, first = a1, p1
        else:
            p, first = b1, _reverse(p1)
        if a2 == x:
            q, second = b2, p2
        else:
            q, second = a2, _reverse(p2)
        adj[p].remove(j1)
        adj[q].remove(j2)
        adj[x] = []
        new_edge(p, q, w1 + w2, first + second)
    # (d) root at the midpoint of one edge
    eids = sorted(ends)
    j = eids[(root_edge or 0) % len(eids)]
    a, b, w, pieces = ends.pop(j)
    adj[a].remove(j)
    adj[b].remove(j)
    left, right = _split(pieces, w / 2)
    root = new_node(0)
    new_edge(a, root, w / 2, left)
    new_edge(root, b, w - w / 2, right)

    # orient from the root and renumber compactly
    ids: dict[int, int] = {root: 0}
    order = [root]
    parent = [-1]
    via: list[int] = [-1]
    t = 0
    while t < len(order):
        x = order[t]
        for jj in sorted(adj[x]):
            rec = ends[jj]
            y = rec[1] if rec[0] == x else rec[0]
            if y in ids:
                continue
            ids[y] = len(order)
            order.append(y)
            parent.append(ids[x])
            via.append(jj)
        t += 1
    nn = len(order)
    children: list[list[int]] = [[] for _ in range(nn)]
    weight = [Fraction(0)] * nn
    edge_of = [-1] * nn
    wedges: list[Edge] = []
    wpieces: list[tuple[Piece, ...]] = []
    for c in range(1, nn):
        jj = via[c]
        ea, eb, ew, ep = ends[jj]
        if ids[ea] != parent[c]:
            ep = _reverse(ep)
        children[parent[c]].append(c)
        weight[c] = ew
        edge_of[c] = len(wedges)
        wedges.append(Edge(parent[c], c, ew))
        wpieces.append(tuple(ep))
    for c in range(nn):
        if len(children[c]) not in (0, 2):
            raise AssertionError(f"preprocessing left vertex {c} with {len(children[c])} children")
    working = WeightedGraph(nn, tuple(wedges))
    # the root maps to the midpoint of its split edge
    points = [vpoint[x] for x in order]
    provisional = Lift(g, working, tuple(points), tuple(wpieces))
    c0, c1 = children[0]
    if wpieces[edge_of[c1]]:
        points[0] = provisional.point((edge_of[c1], Fraction(0)))
    elif wpieces[edge_of[c0]]:
        points[0] = provisional.point((edge_of[c0], Fraction(0)))
    else:
        points[0] = points[c0]
    lift = Lift(g, working, tuple(points), tuple(wpieces))

    agents_at = [tuple(agents[x]) for x in order]
    energy = {a.id: a.energy for a in inst.agents}
    energy_at = [sum((energy[a] for a in ag), Fraction(0)) for ag in agents_at]
    post: list[int] = []
    stack = [(0, False)]
    while stack:
        x, done = stack.pop()
        if done:
            post.append(x)
            continue
        stack.append((x, True))
        for c in reversed(children[x]):
            stack.append((c, False))
    count = [len(ag) for ag in agents_at]
    for x in post:
        for c in children[x]:
            count[x] += count[c]
    return RootedBinaryTree(
        split_choices=len(eids),
        root=0,
        parent=parent,
        children=[tuple(c) for c in children],
        weight=weight,
        edge_of=edge_of,
        agents_at=agents_at,
        energy_at=energy_at,
        lift=lift,
        order=post,
        count=count,
    )


# -- surplus tables -------------------------------------------------------------


@dataclass
class SurplusTable:
    """``values[i - lo]`` is ``B[owner, i]`` (``None`` when unattainable).

    ``prov[i - lo]`` records how the entry was produced: a case tag and
    the child balance for edge tables, the first child's balance for
    vertex tables, ``None`` for leaves.
    """

    owner: str
    lo: int
    hi: int
    values: list
    prov: list
    via: list | None = None  # parked edge tables: edge balance each entry uses

    def get(self, i: int) -> Fraction | None:
        if i < self.lo or i > self.hi:
            return None
        x = self.values[i - self.lo]
        return None if x is None else _frac(x)

    def is_constant(self) -> bool:
        first = self.values[0]
        return first is not None and all(x == first for x in self.values)

    def to_json(self) -> dict[str, Any]:
        vals = {}
        for t, x in enumerate(self.values):
            if x is not None:
                vals[str(self.lo + t)] = fmt_fraction(_frac(x))
        return {"owner": self.owner, "lo": self.lo, "hi": self.hi, "values": vals}


def leaf_table(owner: str, a_v: int, e_v, k: int) -> SurplusTable:
    lo, hi = -k + a_v, a_v
    q = _Q(e_v)
    return SurplusTable(owner, lo, hi, [q] * (hi - lo + 1), [None] * (hi - lo + 1))


def handle_edge(child: SurplusTable, w, owner: str = "e") -> SurplusTable:
    """Surplus above an edge of weight ``w`` given the table of its lower end."""
    lo, hi = child.lo, child.hi
    w = _Q(w)
    vals: list = [None] * (hi - lo + 1)
    prov: list = [None] * (hi - lo + 1)

    def put(i: int, y, tag: str, src: int) -> None:
        if i < lo or i > hi:
            return
        t = i - lo
        if vals[t] is None or y > vals[t]:
            vals[t] = y
            prov[t] = (tag, src)

    for i in range(lo, hi + 1):
        b = child.values[i - lo]
        if b is None:
            continue
        a = -i if i < 0 else i
        if b <= 0:
            if i < 0:
                put(i, b - a * w, "1a", i)
            else:
                put(i, b - (i + 2) * w, ("2a", "3a")[i] if i < 2 else "4a", i)
        elif i <= 0:
            if b > (2 + a) * w:
                put(i, b - (2 + a) * w, "1c" if i < 0 else "2c", i)
            elif i < 0:
                put(i, i * (w - b / (2 + a)), "1b", i)
            else:
                put(-1, (b - 2 * w) / 2, "2b", i)
                put(0, b - 2 * w, "2b'", i)
        else:
            if b >= i * w:
                put(i, b - i * w, "3c" if i == 1 else "4c", i)
            else:
                put(i, -(i + 2) * (w - b / i), "3b''" if i == 1 else "4b", i)
                if i == 1:
                    put(-1, b - w, "3b", i)
                    put(0, 2 * (b - w), "3b'", i)
    return SurplusTable(owner, lo, hi, vals, prov)


def handle_vertex(left: SurplusTable, right: SurplusTable, owner: str = "v") -> SurplusTable:
    """Max-plus combination of the two child-edge tables."""
    k = left.hi - left.lo
    a_v = left.hi + right.hi
    lo, hi = -k + a_v, a_v
    if left.is_constant() and len(left.values) > 1:
        vals, splits = kernels.window_max(left.values[0], left.lo, left.hi, right.values, right.lo, lo, hi)
        return SurplusTable(owner, lo, hi, vals, splits)
    if right.is_constant() and len(right.values) > 1:
        vals, splits = kernels.window_max(right.values[0], right.lo, right.hi, left.values, left.lo, lo, hi)
        # convert to first-child balances
        splits = [None if s is None else lo + t - s for t, s in enumerate(splits)]
        return SurplusTable(owner, lo, hi, vals, splits)
    vals, splits = kernels.maxplus(left.values, left.lo, right.values, right.lo, lo, hi)
    return SurplusTable(owner, lo, hi, vals, splits)


def park_closure(t: SurplusTable) -> SurplusTable:
    """Let agents that came up an edge stop at its top: ``B[e,i] >= B[e,i+1]`` for ``i >= 0``.

    Such an agent hands its energy to whoever is at the upper vertex and
    stays there, so ``i + 1`` upward crossings can also serve as ``i`` in
    the parent's combination.  ``via`` keeps the edge balance each entry
    really uses.
    """
    vals = list(t.values)
    via = list(range(t.lo, t.hi + 1))
    for i in range(t.hi - 1, max(t.lo, 0) - 1, -1):
        x, y = vals[i - t.lo], vals[i + 1 - t.lo]
        if y is not None and (x is None or y > x):
            vals[i - t.lo], via[i - t.lo] = y, via[i + 1 - t.lo]
    return SurplusTable(t.owner, t.lo, t.hi, vals, list(t.prov), via)


@dataclass
class TreeTables:
    tree: RootedBinaryTree
    vertex: list[SurplusTable]
    edge: list[SurplusTable | None]  # by lower vertex; None at the root
    parked: list[SurplusTable | None]  # edge tables after park_closure

    def all_tables(self) -> list[SurplusTable]:
        out = []
        for v in self.tree.order:
            out.append(self.vertex[v])
            if self.edge[v] is not None:
                out.append(self.edge[v])
        return out


def compute_tables(tree: RootedBinaryTree) -> TreeTables:
    k = tree.k
    vtab: list[SurplusTable | None] = [None] * tree.n
    etab: list[SurplusTable | None] = [None] * tree.n
    ptab: list[SurplusTable | None] = [None] * tree.n
    for v in tree.order:
        if tree.is_leaf(v):
            vtab[v] = leaf_table(f"v:{v}", tree.count[v], tree.energy_at[v], k)
        else:
            c1, c2 = tree.children[v]
            vtab[v] = handle_vertex(ptab[c1], ptab[c2], f"v:{v}")
        if v != tree.root:
            etab[v] = handle_edge(vtab[v], tree.weight[v], f"e:{tree.edge_of[v]}")
            ptab[v] = park_closure(etab[v])
    return TreeTables(tree, vtab, etab, ptab)


def root_entry(tables: TreeTables) -> int | None:
    """Smallest balance ``i >= 0`` with a non-negative root surplus."""
    t = tables.vertex[tables.tree.root]
    for i in range(max(0, t.lo), t.hi + 1):
        x = t.values[i - t.lo]
        if x is not None and x >= 0:
            return i
    return None


# -- reconstruction -------------------------------------------------------------


class ReconstructionError(RuntimeError):
    """The stored provenance did not unwind into an executable schedule."""


@dataclass
class LocalEdgeSchedule:
    """What happens on one edge: the winning case and the group moves it implies.

    ``ops`` run in order.  Each is ``(kind, ...)`` with kind ``down``/``up``
    (a group crossing the whole edge carrying ``payload`` on arrival) or
    ``meet`` (a party from each end meets at ``offset``, the merged group
    continues to ``dest`` with ``go`` agents, the rest stop there).
    """

    edge: int
    tag: str
    balance: int      # edge balance j
    child_balance: int
    child_value: Fraction
    weight: Fraction
    ops: list[tuple]

    @property
    def out_first(self) -> bool:
        """The subtree sends a carrier up before anything comes down."""
        return self.tag in _OUT_FIRST or (self.tag == "2b'" and bool(self.ops) and self.ops[0][0] == "up")

    @property
    def meeting_offset(self) -> Fraction | None:
        for op in self.ops:
            if op[0] == "meet":
                return op[1]
        return None


def edge_schedule(edge: int, tag: str, j: int, s: int, b: Fraction, w: Fraction) -> LocalEdgeSchedule:
    """Expand a case tag into group moves (offsets measured from the parent end)."""
    a = -s if s < 0 else s
    if w == 0:
        # free to cross: both ends share one pool, coverage comes from tours
        ops = []
    elif tag == "1a":
        ops = [("down", a, -b)]
    elif tag in ("2a", "3a", "4a"):
        ops = [("down", 1, (s + 1) * w - b), ("up", s + 1, Fraction(0))]
    elif tag in ("1c", "2c"):
        ops = [("up", 1, b - w), ("down", 1 + a, Fraction(0))]
    elif tag == "1b":
        y = b / (2 + a)
        # (offset, party from v: n, energy; party from u: n, energy; dest, travellers)
        ops = [("meet", w - y, 1, b, a, a * (w - y), "v", 1 + a)]
    elif tag == "2b":
        y = b / 2
        ops = [("meet", w - y, 1, b, 1, w - y, "v", 1)]
    elif tag == "2b'":
        if b >= w:  # the carrier can reach the parent on its own
            ops = [("up", 1, b - w), ("down", 1, Fraction(0))]
        else:
            ops = [("down", 1, w - b), ("up", 1, Fraction(0))]
    elif tag in ("3c", "4c"):
        ops = [("up", s, b - s * w)]
    elif tag in ("3b''", "4b"):
        y = w - b / s
        ops = [("meet", y, s, b, 1, (s + 2) * y, "u", s + 1)]
    elif tag == "3b":
        ops = [("meet", w - b, 1, b, 1, w - b, "u", 0)]
    elif tag == "3b'":
        ops = [("meet", w - b, 1, b, 1, 2 * (w - b), "u", 1)]
    else:  # pragma: no cover
        raise ReconstructionError(f"unknown case tag {tag!r}")
    return LocalEdgeSchedule(edge, tag, j, s, b, w, ops)


# outputs a subtree can send up before receiving anything back
_OUT_FIRST = {"1b", "1c", "2c", "2b"}


def _quiet_split(t1: SurplusTable, t2: SurplusTable, i: int, best, default: int) -> int:
    """Among splits reaching ``best``, the one moving fewest agents across either edge."""
    pick, cost = default, abs(default) + abs(i - default)
    for j in range(max(t1.lo, i - t2.hi), min(t1.hi, i - t2.lo) + 1):
        c = abs(j) + abs(i - j)
        if c >= cost:
            continue
        x, y = t1.get(j), t2.get(i - j)
        if x is not None and y is not None and x + y == best:
            pick, cost = j, c
    return pick


def unwind(tables: TreeTables, i_root: int) -> tuple[list[int], list[LocalEdgeSchedule | None]]:
    """Top-down pass: vertex balances and the local schedule of every edge."""
    tree = tables.tree
    bal = [0] * tree.n
    sched: list[LocalEdgeSchedule | None] = [None] * tree.n
    bal[tree.root] = i_root
    stack = [tree.root]
    while stack:
        v = stack.pop()
        if tree.is_leaf(v):
            continue
        vt = tables.vertex[v]
        split = vt.prov[bal[v] - vt.lo]
        if split is None or vt.values[bal[v] - vt.lo] is None:
            raise ReconstructionError(f"no provenance for B[{v},{bal[v]}]")
        c1, c2 = tree.children[v]
        split = _quiet_split(tables.parked[c1], tables.parked[c2], bal[v], vt.values[bal[v] - vt.lo], split)
        for c, j in ((c1, split), (c2, bal[v] - split)):
            et, pt = tables.edge[c], tables.parked[c]
            if pt.lo <= j <= pt.hi:
                j = pt.via[j - pt.lo]  # crossings beyond this stop at v
            if not et.lo <= j <= et.hi or et.prov[j - et.lo] is None:
                raise ReconstructionError(f"no provenance for edge above {c} at balance {j}")
            tag, s = et.prov[j - et.lo]
            b = tables.vertex[c].get(s)
            sched[c] = edge_schedule(tree.edge_of[c], tag, j, s, b, tree.weight[c])
            bal[c] = s
            stack.append(c)
    return bal, sched


class _Simulation:
    """Executes the local edge schedules with one energy pool per zero-weight component.

    Agents in the same pool share energy freely (they gather at the
    departure vertex first; zero-weight edges cost nothing).  A group
    leaving a pool is topped up from the others and takes any leftover
    along when nobody stays behind, since energy cannot wait without an
    agent; the leftover is owed back along that edge.  Competing
    departures from a pool follow a fixed vertex order: a surplus carrier that
    must reach the parent before agents can come down leaves first, then
    groups into the children (those that come back first), and a
    subtree's final output goes up only once everything below it is done.
    """

    def __init__(self, tree: RootedBinaryTree, sched: list[LocalEdgeSchedule | None],
                 energies: dict[int, Fraction]) -> None:
        self.tree = tree
        self.sched = sched
        self.energy = dict(energies)
        self.events: dict[int, list] = {a: [] for a in energies}
        n = tree.n
        self.ptr = [0] * n
        self.parties: dict[int, dict[str, list[int]]] = {}
        self.owed: dict[tuple[int, str], Fraction] = {}
        # zero-weight components, named by their top vertex
        comp = [0] * n
        for v in range(n):  # parents come before children in this numbering
            comp[v] = v if v == tree.root or tree.weight[v] > 0 else comp[tree.parent[v]]
        self.comp = comp
        self.ups: dict[int, list[int]] = {}
        self.downs: dict[int, list[int]] = {}
        self.members: dict[int, list[int]] = {}
        for v in range(n):
            self.members.setdefault(comp[v], []).append(v)
            if v != tree.root and tree.weight[v] > 0:
                self.ups.setdefault(comp[v], []).append(v)
                self.downs.setdefault(comp[tree.parent[v]], []).append(v)
        # positive edges hanging below c inside its own component
        self.below: dict[int, list[int]] = {}
        self._depths: dict[int, int] = {tree.root: 0}
        for v in range(n):
            if v != tree.root:
                self._depths[v] = self._depths[tree.parent[v]] + 1
        self.pos: dict[int, int] = {}
        self.pool: dict[int, list[int]] = {x: [] for x in self.members}
        self.toured: set[int] = set()
        for v in range(n):
            for ag in tree.agents_at[v]:
                self.pos[ag] = v
                self.pool[comp[v]].append(ag)
        for x in self.members:
            if self.pool[x]:
                self._tour(self.pool[x][0])

    # -- helpers
    def _below(self, c: int) -> list[int]:
        got = self.below.get(c)
        if got is None:
            tree = self.tree
            got = []
            stack = list(tree.children[c])
            while stack:
                d = stack.pop()
                if tree.weight[d] > 0:
                    got.append(d)
                else:
                    stack.extend(tree.children[d])
            self.below[c] = got
        return got

    def _done(self, c: int) -> bool:
        s = self.sched[c]
        return s is None or self.ptr[c] >= len(s.ops)

    def _pool_energy(self, x: int) -> Fraction:
        return sum((self.energy[a] for a in self.pool[x]), Fraction(0))

    def _hop(self, a: int, y: int) -> None:
        """Zero-cost walk of agent ``a`` to vertex ``y`` of its component."""
        tree = self.tree
        x = self.pos[a]
        if x == y:
            return
        up_path, down_path = [], []
        p, q = x, y
        depth = self._depth
        while depth(p) > depth(q):
            up_path.append(p)
            p = tree.parent[p]
        while depth(q) > depth(p):
            down_path.append(q)
            q = tree.parent[q]
        while p != q:
            up_path.append(p)
            down_path.append(q)
            p, q = tree.parent[p], tree.parent[q]
        evs = self.events[a]
        for v in up_path:
            evs.append(Move(tree.edge_of[v], Fraction(0), Fraction(0), False))
        for v in reversed(down_path):
            evs.append(Move(tree.edge_of[v], Fraction(0), Fraction(0), True))
        self.pos[a] = y

    def _depth(self, v: int) -> int:
        return self._depths[v]

    def _tour(self, a: int) -> None:
        """First visit of a component: walk all its zero-weight edges and come back."""
        tree = self.tree
        x = self.comp[self.pos[a]]
        if x in self.toured:
            return
        self.toured.add(x)
        inner = [v for v in self.members[x] if v != x]
        if not any(tree.lift.edge_pieces[tree.edge_of[v]] for v in inner):
            return
        start = self.pos[a]
        self._hop(a, x)
        evs = self.events[a]

        def visit(v: int) -> None:  # iterative DFS over the component
            stack = [(v, iter(tree.children[v]))]
            while stack:
                y, it = stack[-1]
                for d in it:
                    if tree.weight[d] == 0:
                        evs.append(Move(tree.edge_of[d], Fraction(0), Fraction(0), True))
                        stack.append((d, iter(tree.children[d])))
                        break
                else:
                    stack.pop()
                    if stack:
                        evs.append(Move(tree.edge_of[y], Fraction(0), Fraction(0), False))

        visit(x)
        self._hop(a, start)

    def _settle(self, at: Point, members: list[int], travellers: list[int], needs: list[Fraction]) -> Fraction:
        """Transfer energy among co-located ``members`` so travellers hold ``needs``.

        Returns the leftover the travellers take along when nobody stays.
        """
        en = self.energy
        target = dict(zip(travellers, needs))
        rest = [m for m in members if m not in target]
        total = sum((en[m] for m in members), Fraction(0))
        req = sum(needs, Fraction(0))
        if total < req:
            raise ReconstructionError(f"pool at {at} short by {req - total}")
        slack = Fraction(0)
        if not rest:
            slack = total - req
            target[travellers[0]] += slack
        else:
            short = req - sum((en[t] for t in travellers), Fraction(0))
            if short > 0:
                for m in rest:
                    take = min(short, en[m])
                    target[m] = en[m] - take
                    short -= take
            else:
                for m in rest:
                    target[m] = en[m]
                target[rest[0]] -= short
        givers = [[m, en[m] - target[m]] for m in members if en[m] > target[m]]
        takers = [[m, target[m] - en[m]] for m in members if en[m] < target[m]]
        gi = 0
        for t in takers:
            while t[1] > 0:
                g = givers[gi]
                amt = min(g[1], t[1])
                self.events[g[0]].append(Give(t[0], amt, at))
                self.events[t[0]].append(Recv(g[0], at, amt))
                en[g[0]] -= amt
                en[t[0]] += amt
                g[1] -= amt
                t[1] -= amt
                if g[1] == 0:
                    gi += 1
        return slack

    def _depart(self, x: int, n: int, needs: list[Fraction]) -> tuple[list[int], Fraction]:
        key = self.comp[x]
        members = self.pool[key]
        order = sorted(members, key=lambda a: (-self.energy[a], a))
        group = order[:n]
        involved = list(members)
        for a in involved:
            self._hop(a, x)
        slack = self._settle(x, involved, group, needs)
        self.pool[key] = [a for a in members if a not in group]
        return group, slack

    def _arrive(self, group: list[int], y: int) -> None:
        for a in group:
            self.pos[a] = y
        self.pool[self.comp[y]].extend(group)
        if group:
            self._tour(group[0])

    def _walk(self, group: list[int], edge: int, frm: Fraction, to: Fraction, down: bool) -> None:
        d = abs(to - frm)
        for a in group:
            self.events[a].append(Move(edge, frm, to, down))
            self.energy[a] -= d
            if self.energy[a] < 0:
                raise ReconstructionError(f"agent {a} overdrawn on edge {edge}")

    # -- candidates in a pool
    def _candidates(self, x: int) -> list[tuple]:
        out = []
        for c in self.ups.get(x, ()):
            if self._done(c):
                continue
            s = self.sched[c]
            op = s.ops[self.ptr[c]]
            if op[0] == "up" or (op[0] == "meet" and "v" not in self.parties.get(c, {})):
                if self.ptr[c] == 0 and s.out_first:
                    out.append(((0,), c, "bottom"))
                elif all(self._done(d) for d in self._below(c)):
                    out.append(((2,), c, "bottom"))
        for c in self.downs.get(x, ()):
            if self._done(c):
                continue
            s = self.sched[c]
            op = s.ops[self.ptr[c]]
            if op[0] == "down" or (op[0] == "meet" and "u" not in self.parties.get(c, {})):
                back = self._returns_to(c, "top")
                out.append(((1, 0 if back else 1, -s.balance), c, "top"))
        out.sort()
        return out

    def _requirement(self, c: int, side: str) -> tuple[int, list[Fraction]]:
        s = self.sched[c]
        op = s.ops[self.ptr[c]]
        w = s.weight
        if op[0] in ("up", "down"):
            n, payload = op[1], op[2]
            payload += self.owed.get((c, "u" if op[0] == "up" else "v"), Fraction(0))
            needs = [w] * n
        elif side == "bottom":
            n, payload = op[2], op[3] - op[2] * (w - op[1])
            needs = [w - op[1]] * n
        else:
            n, payload = op[4], op[5] - op[4] * op[1]
            needs = [op[1]] * n
        if n == 0:
            return 0, []
        needs[0] += payload
        return n, needs

    def _returns_to(self, c: int, side: str) -> bool:
        """Does edge ``c`` bring something back to the ``side`` end later on?"""
        s = self.sched[c]
        here = self.ptr[c]
        op = s.ops[here]
        if op[0] == "meet":
            return op[6] == ("v" if side == "bottom" else "u") and op[7] > 0
        back = "down" if side == "bottom" else "up"
        return any(o[0] == back for o in s.ops[here + 1:])

    def _pending_elsewhere(self, x: int, c: int) -> bool:
        for d in self.ups.get(x, ()):
            if d != c and not self._done(d):
                return True
        return any(d != c and not self._done(d) for d in self.downs.get(x, ()))

    def _enabled(self, x: int, c: int, side: str, strict: bool = True) -> bool:
        n, needs = self._requirement(c, side)
        total = self._pool_energy(x)
        req = sum(needs, Fraction(0))
        if len(self.pool[x]) < n or total < req:
            return False
        if strict and len(self.pool[x]) == n and total > req and not self._returns_to(c, side):
            # the leftover would leave for good; wait while others may need it
            return not self._pending_elsewhere(x, c)
        return True

    def _execute(self, c: int, side: str) -> list[int]:
        """Run one departure; returns the pools that changed."""
        tree = self.tree
        s = self.sched[c]
        op = s.ops[self.ptr[c]]
        e, w = s.edge, s.weight
        u = tree.parent[c]
        x = c if side == "bottom" else u
        here = "v" if side == "bottom" else "u"
        n, needs = self._requirement(c, side)
        group, slack = self._depart(x, n, needs)
        changed = [self.comp[u], self.comp[c]]
        if op[0] in ("up", "down"):
            self.owed.pop((c, "u" if here == "v" else "v"), None)
            if slack:
                self.owed[(c, here)] = self.owed.get((c, here), Fraction(0)) + slack
            if op[0] == "down":
                self._walk(group, e, Fraction(0), w, True)
                self._arrive(group, c)
            else:
                self._walk(group, e, w, Fraction(0), False)
                self._arrive(group, u)
            self.ptr[c] += 1
            return changed
        if slack:
            self.owed[(c, here)] = self.owed.get((c, here), Fraction(0)) + slack
        off = op[1]
        if side == "bottom":
            self._walk(group, e, w, off, False)
        else:
            self._walk(group, e, Fraction(0), off, True)
        for a in group:
            self.pos[a] = -1
        parties = self.parties.setdefault(c, {})
        parties[here] = group
        if len(parties) < 2:
            return changed
        members = parties["v"] + parties["u"]
        dest, go = op[6], op[7]
        at: Point = u if off == 0 else (c if off == w else (e, off))
        if go:
            dist = w - off if dest == "v" else off
            home = parties[dest]
            ranked = home + [a for a in members if a not in home]
            travellers = ranked[:go]
            needs = [dist] * go
            needs[0] += self.owed.pop((c, dest), Fraction(0))
            self._settle(at, members, travellers, needs)
            if dest == "v":
                self._walk(travellers, e, off, w, True)
                self._arrive(travellers, c)
            else:
                self._walk(travellers, e, off, Fraction(0), False)
                self._arrive(travellers, u)
        del self.parties[c]
        self.owed.pop((c, "u"), None)
        self.owed.pop((c, "v"), None)
        self.ptr[c] += 1
        return changed

    def run(self) -> None:
        tree = self.tree
        keys = list(self.members)
        queued = {x: False for x in keys}
        dirty: list[int] = []

        def touch(y: int) -> None:
            if not queued[y]:
                queued[y] = True
                dirty.append(y)

        for x in keys:
            touch(x)
        strict = True
        while True:
            while dirty:
                x = dirty.pop()
                queued[x] = False
                for _, c, side in self._candidates(x):
                    if self._enabled(x, c, side, strict):
                        for y in self._execute(c, side):
                            touch(y)
                            if y != tree.root:
                                touch(self.comp[tree.parent[y]])
                        touch(x)
                        strict = True
                        break
            if not strict or all(self._done(c) for c in range(tree.n)):
                break
            # nothing moves: allow leftovers to leave with a one-way group
            strict = False
            for x in keys:
                touch(x)
        stuck = [c for c in range(tree.n) if not self._done(c)]
        if stuck:
            detail = ", ".join(f"edge {self.sched[c].edge} ({self.sched[c].tag}) at step {self.ptr[c]}" for c in stuck[:5])
            raise ReconstructionError(f"schedule deadlocked: {detail}")


def reconstruct(tables: TreeTables, i_root: int, energies: dict[int, Fraction]) -> Solution:
    """Trajectories on the working tree realising root entry ``i_root``."""
    bal, sched = unwind(tables, i_root)
    sim = _Simulation(tables.tree, sched, energies)
    sim.run()
    meta = {
        "method": "tree",
        "root_balance": i_root,
        "root_surplus": fmt_fraction(tables.vertex[tables.tree.root].get(i_root)),
        "cases": {str(s.edge): s.tag for s in sched if s is not None},
    }
    return Solution(sim.events, meta)


def solve_tree(inst: Instance, root_edge: int | None = None, *, want_solution: bool = True,
               keep_tables: bool = False) -> SolveResult:
    """Decide a tree (or path) instance and, when feasible, build a schedule."""
    norm, lift0 = normalize(inst)
    tree = preprocess(norm, root_edge)
    tables = compute_tables(tree)
    i_root = root_entry(tables)
    root_t = tables.vertex[tree.root]
    diag: dict[str, Any] = {
        "k": tree.k,
        "working_vertices": tree.n,
        "kernels": kernels.BACKEND,
        "root_table": root_t.to_json()["values"],
    }
    if keep_tables:
        diag["tables"] = [t.to_json() for t in tables.all_tables()]
    if i_root is None:
        best = max((x for i, x in enumerate(root_t.values) if x is not None and root_t.lo + i >= 0), default=None)
        diag["reason"] = "no root entry with a non-negative surplus and balance >= 0"
        if best is not None:
            diag["best_surplus"] = fmt_fraction(_frac(best))
        return SolveResult("infeasible", "tree", None, diag)
    diag["root_balance"] = i_root
    sol = None
    if want_solution:
        energies = {a.id: a.energy for a in norm.agents}
        working = reconstruct(tables, i_root, energies)
        sol = tree.lift.then(lift0).solution(working)
    return SolveResult("feasible", "tree", sol, diag)
