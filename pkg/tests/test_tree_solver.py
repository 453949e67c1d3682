from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from energyshare.generators import star, star_e1, star_e2
from energyshare.model import InstanceError, Move, make_instance, normalize, totals
from energyshare.path_solver import solve_path_instance
from energyshare.tree_solver import (
    SurplusTable,
    _frac,
    _Q,
    compute_tables,
    edge_schedule,
    handle_edge,
    handle_vertex,
    leaf_table,
    park_closure,
    preprocess,
    solve_tree,
)
from energyshare.validator import validate


def table(entries: dict[int, F], lo: int, hi: int) -> SurplusTable:
    vals = [None if entries.get(i) is None else _Q(entries[i]) for i in range(lo, hi + 1)]
    return SurplusTable("v:test", lo, hi, vals, [None] * len(vals))


def finite(t: SurplusTable) -> dict[int, F]:
    return {t.lo + j: _frac(x) for j, x in enumerate(t.values) if x is not None}


def tags(t: SurplusTable) -> dict[int, str]:
    return {t.lo + j: p[0] for j, p in enumerate(t.prov) if p is not None}


# -- preprocessing -------------------------------------------------------------


def check_binary(tree, inst):
    for v in range(tree.n):
        assert len(tree.children[v]) in (0, 2)
        if tree.agents_at[v]:
            assert tree.is_leaf(v)
    assert len(tree.children[tree.root]) == 2
    assert sum(tree.weight[v] for v in range(tree.n) if v != tree.root) == inst.graph.total_weight


def test_preprocess_star_with_center_agent():
    inst = star(4, [(0, 3)])
    tree = preprocess(inst)
    check_binary(tree, inst)
    leaves = [v for v in range(tree.n) if tree.is_leaf(v)]
    assert len(leaves) == 5
    (holder,) = [v for v in leaves if tree.agents_at[v]]
    assert tree.weight[holder] == 0


def test_preprocess_four_path():
    inst = make_instance(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)], [(1, 2), (2, 2)])
    tree = preprocess(inst)
    check_binary(tree, inst)
    pendant = [v for v in range(tree.n) if tree.agents_at[v]]
    assert len(pendant) == 2 and all(tree.weight[v] == 0 for v in pendant)


def test_preprocess_leaf_agents_only_collapse_and_split():
    # a spider with 3 legs of length 2; agents on the feet
    edges = [(0, 1, 1), (1, 2, 1), (0, 3, 1), (3, 4, 1), (0, 5, 1), (5, 6, 1)]
    inst = make_instance(7, edges, [(2, 1), (4, 1), (6, 1)])
    tree = preprocess(inst)
    check_binary(tree, inst)
    assert all(w != 0 for v, w in enumerate(tree.weight) if v != tree.root)
    assert tree.n == 5  # the root (middle of one leg), the center and three feet


def test_preprocess_rejects_cycle():
    tri = make_instance(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)], [(0, 1)])
    with pytest.raises(InstanceError):
        preprocess(tri)


# -- the two table operations ------------------------------------------------


def test_handle_edge_case_1a():
    out = handle_edge(table({-1: F(-1)}, -1, 1), F(2))
    assert finite(out) == {-1: -3} and tags(out)[-1] == "1a"


def test_handle_edge_case_2c():
    out = handle_edge(table({0: F(5)}, -1, 1), F(1))
    assert finite(out) == {0: 3} and tags(out)[0] == "2c"


def test_handle_edge_cases_3b():
    out = handle_edge(table({1: F(1)}, -1, 1), F(2))
    assert finite(out) == {1: -3, -1: -1, 0: -2}
    assert tags(out) == {1: "3b''", -1: "3b", 0: "3b'"}


def test_handle_edge_case_1b():
    out = handle_edge(table({-1: F(5)}, -1, 1), F(2))
    assert finite(out) == {-1: F(-1, 3)} and tags(out)[-1] == "1b"


def test_case_1b_meeting_point_balances():
    b, w = F(5), F(2)
    sch = edge_schedule(0, "1b", -1, -1, b, w)
    (op,) = sch.ops
    _, off, nv, ev, nu, eu, dest, go = op
    assert off == w - b / 3
    # the lower agent walks up to the meeting point, the upper one down to it
    at_meet = (ev - (w - off)) + (eu - nu * off)
    assert dest == "v" and at_meet == go * (w - off)
    assert -eu == F(-1, 3)


def test_handle_edge_max_merge_against_all_formulas():
    rng = random.Random(5)
    for _ in range(300):
        k = rng.randint(1, 4)
        av = rng.randint(0, k)
        lo, hi = av - k, av
        ents = {i: F(rng.randint(-8, 12), rng.randint(1, 3)) for i in range(lo, hi + 1) if rng.random() < 0.8}
        w = F(rng.randint(0, 6), rng.randint(1, 2))
        out = finite(handle_edge(table(ents, lo, hi), w))
        assert out == brute_edge(ents, w, lo, hi)


def brute_edge(B, w, lo, hi):
    """The edge recurrence transcribed case by case, max-merged."""
    out: dict[int, F] = {}

    def put(i, y):
        if lo <= i <= hi and (i not in out or y > out[i]):
            out[i] = y

    for i, b in B.items():
        if b <= 0:
            put(i, b - abs(i) * w if i < 0 else b - (i + 2) * w)
        elif i <= 0:
            if b > (2 + abs(i)) * w:
                put(i, b - (2 + abs(i)) * w)
            elif i < 0:
                put(i, i * (w - b / (2 + abs(i))))
            else:
                put(-1, (b - 2 * w) / 2)
                put(0, b - 2 * w)
        elif b >= i * w:
            put(i, b - i * w)
        else:
            put(i, -(i + 2) * (w - b / i))
            if i == 1:
                put(-1, b - w)
                put(0, 2 * (b - w))
    return out


def test_handle_vertex_small_convolution():
    out = handle_vertex(table({0: F(1), 1: F(-2)}, 0, 1), table({0: F(2), 1: F(0)}, 0, 1))
    assert out.get(1) == 1
    assert out.prov[1 - out.lo] == 0


def test_handle_vertex_constant_zero_children():
    k = 3
    z = table({i: F(0) for i in range(-k, 1)}, -k, 0)
    out = handle_vertex(z, table({i: F(0) for i in range(-k, 1)}, -k, 0))
    assert finite(out) == {i: 0 for i in range(-k, 1)}


def test_leaf_table_is_constant():
    t = leaf_table("v:1", 2, F(5), 4)
    assert (t.lo, t.hi) == (-2, 2)
    assert set(finite(t).values()) == {5} and len(finite(t)) == 5


def test_window_max_matches_convolution():
    from energyshare import _kernels_py as py

    rng = random.Random(9)
    for _ in range(300):
        n1, n2 = rng.randint(1, 6), rng.randint(1, 6)
        c = _Q(F(rng.randint(-5, 5), rng.randint(1, 3)))
        b = [None if rng.random() < 0.2 else _Q(F(rng.randint(-9, 9), rng.randint(1, 3))) for _ in range(n2)]
        clo, blo = rng.randint(-3, 1), rng.randint(-3, 1)
        lo, hi = clo + blo, clo + n1 - 1 + blo + n2 - 1
        wv, _ = py.window_max(c, clo, clo + n1 - 1, b, blo, lo, hi)
        mv, _ = py.maxplus([c] * n1, clo, b, blo, lo, hi)
        assert wv == mv


def test_tables_cover_exact_index_range():
    inst = star_e1(3, 11)
    tables = compute_tables(preprocess(inst))
    k = inst.k
    for t in tables.all_tables():
        assert t.hi - t.lo == k


# -- decisions ------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_star_tightness(k):
    assert solve_tree(star_e1(k, 4 * k - 1)).feasible
    assert not solve_tree(star_e1(k, 4 * k - 1 - F(1, 1000))).feasible
    assert solve_tree(star_e2(k)).feasible


def test_star_k2_examples():
    assert solve_tree(star_e1(2, 7)).feasible
    assert not solve_tree(star_e1(2, F(69, 10))).feasible


def test_four_path_as_tree():
    path = [(0, 1, 1), (1, 2, 1), (2, 3, 1)]
    assert solve_tree(make_instance(4, path, [(1, 2), (2, 2)])).feasible
    assert not solve_tree(make_instance(4, path, [(1, 2), (2, F(19, 10))])).feasible


# -- reconstruction -------------------------------------------------------------


def test_single_edge_single_crossing():
    inst = make_instance(2, [(0, 1, 3)], [(1, 3)])
    sol = solve_tree(inst).solution
    moves = [ev for ev in sol.events[0] if isinstance(ev, Move)]
    assert sum(m.length for m in moves) == 3
    assert sol.transfers() == []
    assert validate(inst, sol).valid


def test_star_e1_center_does_all_the_walking():
    inst = star_e1(2, 7)
    sol = solve_tree(inst).solution
    rep = validate(inst, sol)
    assert rep.valid and rep.movement == 7
    assert all(sol.events[a] == [] for a in (1, 2))
    per_edge: dict[int, F] = {}
    for ev in sol.events[0]:
        per_edge[ev.edge] = per_edge.get(ev.edge, F(0)) + ev.length
    assert sorted(per_edge.values()) == [1, 2, 2, 2]


def random_tree(rng, n_max=8, k_max=4, zero=True):
    n = rng.randint(2, n_max)
    weights = [0, 1, 2, F(1, 2), 3] if zero else [1, 2, F(1, 2), 3]
    edges = [(rng.randrange(v), v, rng.choice(weights)) for v in range(1, n)]
    if all(w == 0 for *_, w in edges):
        edges[0] = (edges[0][0], edges[0][1], 1)
    W = sum(F(w) for *_, w in edges)
    agents = []
    for _ in range(rng.randint(1, k_max)):
        e = F(rng.randint(0, 8)) * W / 6
        if rng.random() < 0.2:
            j = rng.randrange(n - 1)
            agents.append(((j, F(edges[j][2]) / 2), e))
        else:
            agents.append((rng.randrange(n), e))
    return make_instance(n, edges, agents)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_solution_closure(seed):
    inst = random_tree(random.Random(seed))
    res = solve_tree(inst)
    if res.feasible:
        rep = validate(inst, res.solution)
        assert rep.valid, rep.to_dict()
        assert rep.movement + sum(rep.residuals.values()) == totals(inst)[1]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_root_choice_does_not_change_verdict(seed):
    inst = random_tree(random.Random(seed))
    verdicts = {solve_tree(inst, r, want_solution=False).verdict for r in range(4)}
    assert len(verdicts) == 1


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_more_energy_never_hurts(seed):
    rng = random.Random(seed)
    inst = random_tree(rng)
    if not solve_tree(inst, want_solution=False).feasible:
        return
    j = rng.randrange(inst.k)
    more = make_instance(inst.graph.n, [(e.u, e.v, e.w) for e in inst.graph.edges],
                         [(a.at, a.energy + F(1, 2) * (i == j)) for i, a in enumerate(inst.agents)])
    assert solve_tree(more, want_solution=False).feasible


def test_agrees_with_path_solver():
    rng = random.Random(77)
    for _ in range(300):
        n = rng.randint(2, 7)
        edges = [(v, v + 1, rng.choice([0, 1, 2, F(1, 2)])) for v in range(n - 1)]
        if all(w == 0 for *_, w in edges):
            edges[0] = (0, 1, 1)
        agents = [(rng.randrange(n), F(rng.randint(0, 12), 2)) for _ in range(rng.randint(1, 4))]
        inst = make_instance(n, edges, agents)
        assert solve_tree(inst, want_solution=False).verdict == solve_path_instance(inst).verdict


def test_normalized_agents_on_edges():
    inst = make_instance(3, [(0, 1, 2), (1, 2, 2)], [((0, F(1, 2)), 3), ((1, F(3, 2)), 3)])
    res = solve_tree(inst)
    assert res.verdict == solve_path_instance(inst).verdict
    assert normalize(inst)[0].graph.n == 5
    if res.feasible:
        assert validate(inst, res.solution).valid


PARKING = [
    # both agents must meet at the unloaded center, one stays there
    ([(0, 1, F(2, 3)), (0, 2, F(3, 4)), (0, 3, 2)], [(2, F(943, 480)), (1, F(943, 480))]),
    # same, while an agent from the far side passes through the center
    ([(0, 1, 2), (0, 2, F(2, 3)), (0, 3, 1)], [(3, F(1177, 675)), (2, F(1177, 540))]),
]


@pytest.mark.parametrize("edges, agents", PARKING)
def test_agents_may_stop_at_an_internal_vertex(edges, agents):
    inst = make_instance(4, edges, agents)
    for r in range(3):
        res = solve_tree(inst, root_edge=r)
        assert res.feasible, r
        assert validate(inst, res.solution).valid


def test_park_closure_only_lowers_positive_balances():
    t = SurplusTable("e", -1, 2, [F(5), F(-1), F(3), F(2)], [None] * 4)
    p = park_closure(t)
    assert p.values == [F(5), F(3), F(3), F(2)]
    assert p.via == [-1, 1, 1, 2]
