from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from energyshare.euler_solver import (
    NotEulerianError,
    euler_circuit,
    plan_relay,
    solve_by_doubling,
    solve_cycle_on_circuit,
    solve_eulerian,
)
from energyshare.generators import gen_random, star, star_e1
from energyshare.model import AgentPlacement, Edge, WeightedGraph, make_instance, normalize, totals
from energyshare.validator import validate

TRI = [(0, 1, 1), (1, 2, 1), (2, 0, 1)]


def graph(pairs):
    return WeightedGraph(max(max(u, v) for u, v, _ in pairs) + 1, tuple(Edge(u, v, F(w)) for u, v, w in pairs))


def agents(energies):
    return [AgentPlacement(i, i, F(e)) for i, e in enumerate(energies)]


def test_triangle_circuit():
    c = euler_circuit(graph(TRI))
    assert c.length == 3
    assert sorted(e for e, _, _ in c.steps) == [0, 1, 2]
    for (_, _, head), (_, tail, _) in zip(c.steps, c.steps[1:] + c.steps[:1]):
        assert head == tail


def test_doubled_edge_circuit():
    c = euler_circuit(graph([(0, 1, 1), (0, 1, 1)]))
    assert [(t, h) for _, t, h in c.steps] == [(0, 1), (1, 0)]
    assert c.length == 2


def test_odd_degree_rejected():
    with pytest.raises(NotEulerianError):
        euler_circuit(graph([(0, 1, 1), (1, 2, 1)]))


def test_circuit_is_deterministic_and_uses_each_edge_once():
    rng = random.Random(3)
    for seed in range(40):
        inst = gen_random(seed, "Eulerian", rng.randint(3, 9), 2, 1)
        c1, c2 = euler_circuit(inst.graph), euler_circuit(inst.graph)
        assert c1 == c2
        assert sorted(e for e, _, _ in c1.steps) == list(range(inst.graph.m))


def test_relay_symmetric_triangle_any_start():
    c = euler_circuit(graph(TRI))
    plan = plan_relay(c, agents([1, 1, 1]))
    assert plan.start == 0 and all(x == 0 for x in plan.ledger)


def test_relay_single_carrier_elides_zero_pickups():
    c = euler_circuit(graph(TRI))
    sol, plan = solve_cycle_on_circuit(c, agents([3, 0, 0]))
    assert sol.transfers() == []
    assert sol.meta["collector"] == 0


def test_relay_accepts_exactly_nonnegative_ledgers():
    c = euler_circuit(graph(TRI))
    energies = [F(1, 2), F(1), F(3, 2)]
    plan = plan_relay(c, agents(energies))
    d = plan.distances

    def ledger_ok(s):
        bal = F(0)
        for i in range(3):
            q = (s + i) % 3
            bal += plan.gains[q] - d[q]
            if bal < 0:
                return False
        return True

    valid = [s for s in range(3) if ledger_ok(s)]
    assert valid and plan.start == min(valid)


def test_relay_deficit():
    c = euler_circuit(graph(TRI))
    sol, plan = solve_cycle_on_circuit(c, agents([1, 1, 1 - F(1, 10)]))
    assert sol is None and plan.surplus == F(-1, 10)


def test_gas_station_start_always_exists():
    rng = random.Random(1)
    for _ in range(300):
        inst = gen_random(rng.randrange(10**6), rng.choice(["Cycle", "Eulerian"]), rng.randint(2, 8),
                          rng.randint(1, 5), 1)
        norm, _ = normalize(inst)
        sol, plan = solve_cycle_on_circuit(euler_circuit(norm.graph), norm.agents)
        if plan.surplus >= 0:
            assert plan.start >= 0 and all(x >= 0 for x in plan.ledger)


def test_solve_eulerian_examples():
    assert solve_eulerian(make_instance(3, TRI, [(0, 3)])).feasible
    assert not solve_eulerian(make_instance(3, TRI, [(0, 3 - F(1, 10))])).feasible
    res = solve_eulerian(make_instance(2, [(0, 1, 1), (0, 1, 1)], [(0, 1), (1, 1)]))
    inst = make_instance(2, [(0, 1, 1), (0, 1, 1)], [(0, 1), (1, 1)])
    assert res.feasible and validate(inst, res.solution).valid


def test_solve_eulerian_rejects_trees():
    with pytest.raises(NotEulerianError):
        solve_eulerian(star(3, [(0, 9)]))


def test_doubling_examples():
    inst = star(4, [(0, 8)])
    res = solve_by_doubling(inst)
    rep = validate(inst, res.solution)
    assert res.feasible and rep.valid and rep.movement == 8
    assert solve_by_doubling(star_e1(2, 7)).verdict == "unknown"
    assert solve_by_doubling(star(4, [(0, 4 - F(1, 10))])).verdict == "infeasible"


def test_eulerian_with_interior_agents():
    inst = make_instance(3, TRI, [((0, F(1, 3)), 2), ((2, F(1, 2)), 1)])
    res = solve_eulerian(inst)
    rep = validate(inst, res.solution)
    assert rep.valid and rep.movement == 3
    assert rep.movement + sum(rep.residuals.values()) == 3


def test_agreement_on_eulerian_instances():
    for seed in range(60):
        inst = gen_random(seed, "Eulerian", 6, 3, 2)
        a, b = solve_eulerian(inst), solve_by_doubling(inst)
        assert a.feasible and b.feasible
        W, _ = totals(inst)
        assert validate(inst, a.solution).movement == W
        assert validate(inst, b.solution).movement == 2 * W
