from __future__ import annotations

import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from energyshare.model import InstanceError, make_instance, normalize
from energyshare.oracle import brute_force_path
from energyshare.path_solver import embed, min_energy_prefix, solve_path, solve_path_instance
from energyshare.validator import validate


def unit_path(n, agents):
    return make_instance(n, [(v, v + 1, 1) for v in range(n - 1)], agents)


def test_embed_examples():
    emb = embed(unit_path(4, [(1, 2), (2, 2)]))
    assert emb.length == 3 and emb.s == (1, 2)
    emb = embed(make_instance(2, [(0, 1, 5)], [(0, 1)]))
    assert emb.length == 5 and emb.s == (0,)
    emb = embed(unit_path(3, [(2, 1), (1, 1), (1, 1)]))
    assert emb.s == (1, 1, 2) and emb.agent_ids == (1, 2, 0)


def test_embed_rejects_non_path():
    tri = make_instance(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)], [(0, 1)])
    with pytest.raises(InstanceError):
        embed(tri)


def test_single_agent_at_midpoint():
    seg = make_instance(2, [(0, 1, 1)], [((0, F(1, 2)), F(3, 2))])
    assert solve_path_instance(seg).feasible
    short = make_instance(2, [(0, 1, 1)], [((0, F(1, 2)), F(3, 2) - F(1, 10**6))])
    assert not solve_path_instance(short).feasible


def test_eps_transfer():
    eps = F(1, 10)
    inst = unit_path(4, [(1, 3 + eps), (2, 1 - eps)])
    res = solve_path_instance(inst)
    assert res.feasible
    gives = res.solution.transfers()
    assert [(a, g.to, g.amount) for a, g in gives] == [(0, 1, eps)]
    assert res.solution.meta["rounds"] == {0: 1, 1: 2}


def test_total_below_four_is_infeasible():
    res = solve_path_instance(unit_path(4, [(1, 2), (2, F(19, 10))]))
    assert not res.feasible
    assert "short" in res.diagnostics["reason"] or "stops" in res.diagnostics["reason"]


def test_two_ends_of_unit_segment():
    res = solve_path_instance(make_instance(2, [(0, 1, 1)], [(0, F(1, 2)), (1, F(1, 2))]))
    assert res.feasible and res.solution.transfers() == []


def test_min_energy_prefix():
    emb = embed(unit_path(4, [(1, 2), (2, 2)]))
    assert min_energy_prefix(emb, [F(2), F(2)], 1) == (0, 0)
    # agent 1 spends all of its 2 units covering [0, 3/2]
    assert min_energy_prefix(emb, [F(2), F(2)], 2) == (F(3, 2), 0)
    assert min_energy_prefix(emb, [F(0), F(4)], 2) == (1, -1)
    with pytest.raises((IndexError, ValueError)):
        min_energy_prefix(emb, [F(2), F(2)], 4)


def test_prefix_minimum_agrees_with_oracle():
    # the right agent alone must cover [3/2, 3] from 2: exactly 2 units
    emb = embed(unit_path(4, [(1, 2), (2, 2)]))
    assert brute_force_path(emb, [F(2), F(2)])
    assert not brute_force_path(emb, [F(2), F(2) - F(1, 100)])


def test_three_rounds_of_leftward_transfers():
    inst = unit_path(5, [(1, 0), (2, 0), (3, 10)])
    res = solve_path_instance(inst)
    assert res.solution.meta["rounds"] == {0: 3, 1: 2, 2: 1}
    assert validate(inst, res.solution).valid


def test_single_agent_has_no_transfers():
    res = solve_path_instance(unit_path(3, [(1, 3)]))
    assert res.feasible and res.solution.transfers() == []


def random_path(rng, kmax=3):
    n = rng.randint(2, 5)
    edges = [(v, v + 1, F(rng.randint(0, 6), rng.randint(1, 2))) for v in range(n - 1)]
    if all(w == 0 for *_, w in edges):
        edges[0] = (0, 1, F(1))
    agents = [(rng.randrange(n), F(rng.randint(0, 12), rng.randint(1, 4))) for _ in range(rng.randint(1, kmax))]
    return make_instance(n, edges, agents)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_state_invariant_and_shapes(seed):
    inst = random_path(random.Random(seed), kmax=5)
    norm, _ = normalize(inst)
    emb = embed(norm)
    energies = [norm.agent(a).energy for a in emb.agent_ids]
    out = solve_path(emb, energies)
    s = list(emb.s) + [emb.length]
    for i, (ell, tr) in enumerate(out.states[1:], start=1):
        if tr < 0:
            assert ell == s[i - 1]
        elif tr > 0:
            assert ell == s[i]
    for t in out.trajectories:
        assert t.left <= t.s <= t.right
        assert t.doubly_covered <= t.singly_covered
    res = solve_path_instance(inst)
    if res.feasible:
        rep = validate(inst, res.solution)
        assert rep.valid
        assert rep.movement + sum(rep.residuals.values()) == sum(a.energy for a in inst.agents)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9), st.fractions(min_value=F(1, 4), max_value=5, max_denominator=7))
def test_scale_equivariance(seed, c):
    inst = random_path(random.Random(seed))
    scaled = make_instance(
        inst.graph.n,
        [(e.u, e.v, e.w * c) for e in inst.graph.edges],
        [(a.at, a.energy * c) for a in inst.agents],
    )
    assert solve_path_instance(inst).verdict == solve_path_instance(scaled).verdict


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_adding_energy_keeps_feasibility(seed):
    rng = random.Random(seed)
    inst = random_path(rng)
    if not solve_path_instance(inst).feasible:
        return
    j = rng.randrange(inst.k)
    more = make_instance(inst.graph.n, [(e.u, e.v, e.w) for e in inst.graph.edges],
                         [(a.at, a.energy + (1 if i == j else 0)) for i, a in enumerate(inst.agents)])
    assert solve_path_instance(more).feasible
