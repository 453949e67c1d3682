from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from energyshare.model import make_instance, normalize
from energyshare.oracle import brute_force_instance, brute_force_path
from energyshare.path_solver import embed, solve_path


def _emb(n, agents, w=1):
    return embed(make_instance(n, [(v, v + 1, w) for v in range(n - 1)], agents))


def test_midpoint_of_unit_segment():
    emb = embed(normalize(make_instance(2, [(0, 1, 1)], [((0, F(1, 2)), 0)]))[0])
    assert brute_force_path(emb, [F(3, 2)])
    assert not brute_force_path(emb, [F(3, 2) - F(1, 1000)])


def test_four_path_needs_four():
    emb = _emb(4, [(1, 0), (2, 0)])
    assert not brute_force_path(emb, [F(2), F(19, 10)])
    assert brute_force_path(emb, [F(2), F(2)])


def test_rejects_more_than_three_agents():
    emb = _emb(5, [(v, 1) for v in range(4)])
    with pytest.raises(ValueError):
        brute_force_path(emb, [F(1)] * 4)


def _random_case(rng):
    n = rng.randint(2, 5)
    edges = [(v, v + 1, F(rng.randint(1, 6), rng.randint(1, 2))) for v in range(n - 1)]
    agents = [(rng.randrange(n), F(rng.randint(0, 12), rng.randint(1, 4))) for _ in range(rng.randint(1, 3))]
    norm, _ = normalize(make_instance(n, edges, agents))
    emb = embed(norm)
    return emb, [norm.agent(a).energy for a in emb.agent_ids]


def test_agrees_with_greedy_on_random_family():
    rng = random.Random(2024)
    for _ in range(200):
        emb, energies = _random_case(rng)
        assert brute_force_path(emb, energies) == solve_path(emb, energies).feasible


def test_monotone_in_energy():
    rng = random.Random(11)
    for _ in range(150):
        emb, energies = _random_case(rng)
        if brute_force_path(emb, energies):
            j = rng.randrange(len(energies))
            more = list(energies)
            more[j] += F(1, 3)
            assert brute_force_path(emb, more)


def test_instance_wrapper():
    inst = make_instance(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)], [(1, 2), (2, 2)])
    assert brute_force_instance(inst)
