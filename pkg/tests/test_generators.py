from __future__ import annotations

from fractions import Fraction as F

import pytest

from energyshare.dispatch import solve
from energyshare.euler_solver import solve_by_doubling
from energyshare.generators import (
    GadgetParams,
    GeneratorError,
    gen_gadget,
    gen_random,
    hamiltonian_witness_schedule,
    k4,
    reference_corpus,
    prism,
)
from energyshare.model import TopologyClass, WeightedGraph, classify, instance_to_dict, totals
from energyshare.validator import validate

K4_CYCLE = [0, 1, 2, 3]
PRISM_CYCLE = [0, 1, 2, 5, 4, 3]


def test_k4_gadget_energies_follow_the_formulas():
    gi = gen_gadget(k4(), GadgetParams(F(21), F(1), F(1, 100)))
    energies = {a.id: a.energy for a in gi.instance.agents}
    assert len(energies) == 4
    assert energies[0] == 3 * 21 + 5 + 8 * F(1, 100)
    assert all(energies[v] == 68 + F(1, 100) for v in (1, 2, 3))


def test_parameter_checks():
    with pytest.raises(GeneratorError, match="5nb"):
        gen_gadget(k4(), GadgetParams(F(20), F(1), F(1, 100)))
    with pytest.raises(GeneratorError, match="eps"):
        gen_gadget(k4(), GadgetParams(F(21), F(1), F(1, 12)))


def test_source_must_be_cubic():
    with pytest.raises(GeneratorError):
        gen_gadget(WeightedGraph(4, k4().edges[:3]))


def test_prism_counts():
    gi = gen_gadget(prism())
    assert len(gi.gadgets) == 9 and gi.instance.k == 6


@pytest.mark.parametrize("g3", [k4(), prism()], ids=["k4", "prism"])
def test_counting_identities(g3):
    n = g3.n
    for variant, extra in (("published", -1), ("repaired", 0)):
        gi = gen_gadget(g3, variant=variant)
        p = gi.params
        W, E = totals(gi.instance)
        assert E - W == 2 * p.b * n + extra * p.eps
        assert len(gi.gadgets) == 3 * n // 2
        spines = [gi.instance.graph.edges[j].w for gd in gi.gadgets for j in gd.spine]
        assert spines.count(p.a + p.eps * n) == 3


@pytest.mark.parametrize("g3, cyc", [(k4(), K4_CYCLE), (prism(), PRISM_CYCLE)], ids=["k4", "prism"])
def test_witness_on_repaired_variant(g3, cyc):
    gi = gen_gadget(g3, variant="repaired")
    sol = hamiltonian_witness_schedule(gi, cyc)
    p = gi.params
    assert validate(gi.instance, sol).valid
    assert sol.meta["explorer_residual"] == p.a + p.b + p.eps * g3.n


@pytest.mark.parametrize("g3, cyc", [(k4(), K4_CYCLE), (prism(), PRISM_CYCLE)], ids=["k4", "prism"])
def test_witness_on_published_energies_is_one_eps_short(g3, cyc):
    gi = gen_gadget(g3, variant="published")
    sol = hamiltonian_witness_schedule(gi, cyc)
    p = gi.params
    assert sol.meta["explorer_residual"] == p.a + p.b + p.eps * (g3.n - 1)
    rep = validate(gi.instance, sol)
    assert not rep.valid
    assert [v[2] for v in rep.energy_violations] == [p.eps]


def test_witness_rejects_bad_cycles():
    gi = gen_gadget(k4())
    with pytest.raises(GeneratorError):
        hamiltonian_witness_schedule(gi, [0, 1, 2])
    with pytest.raises(GeneratorError):
        hamiltonian_witness_schedule(gi, [1, 0, 2, 3])
    gp = gen_gadget(prism())
    with pytest.raises(GeneratorError):
        hamiltonian_witness_schedule(gp, [0, 1, 2, 3, 4, 5])  # 2-3 is not an edge


def test_sidecar_mapping():
    gi = gen_gadget(k4())
    side = gi.sidecar()
    assert len(side["gadgets"]) == 6
    assert side["meta_vertices"] == {str(v): v for v in range(4)}


def test_gen_random_examples():
    path = gen_random(1, TopologyClass.PATH, 5, 3, F(3, 2))
    W, E = totals(path)
    assert classify(path) is TopologyClass.PATH and E == F(3, 2) * W
    tree = gen_random(1, "Tree", 8, 4, 2)
    W, E = totals(tree)
    assert classify(tree) is TopologyClass.TREE and E == 2 * W
    assert instance_to_dict(gen_random(1, "Tree", 8, 4, 2)) == instance_to_dict(tree)


@pytest.mark.parametrize("cls", list(TopologyClass))
def test_gen_random_class_and_budget(cls):
    for seed in range(20):
        inst = gen_random(seed, cls, 6, 3, F(5, 2))
        W, E = totals(inst)
        assert classify(inst) is cls and E == F(5, 2) * W


def test_gen_random_errors():
    with pytest.raises(GeneratorError):
        gen_random(0, "Path", 1, 1, 1)
    with pytest.raises(GeneratorError):
        gen_random(0, "Tree", 3, 1, 1)
    with pytest.raises(GeneratorError):
        gen_random(0, "Path", 4, 0, 1)


def test_ratio_two_is_always_doubling_feasible():
    for seed in range(100):
        inst = gen_random(seed, "General", 7, 3, 2)
        assert solve_by_doubling(inst).feasible


def test_corpus_verdicts_and_solvers():
    corpus = reference_corpus()
    for name in ("intro-4path-22", "star-k2-E1", "star-k2-E1-minus", "intro-4path-endpoints"):
        assert name in corpus
    for name, entry in corpus.items():
        res = solve(entry.instance, entry.solver)
        assert res.verdict == entry.expected, name
        if res.feasible:
            assert validate(entry.instance, res.solution).valid, name
