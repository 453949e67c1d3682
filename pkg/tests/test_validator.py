from __future__ import annotations

from dataclasses import replace
from fractions import Fraction as F

from energyshare.model import Give, Move, Recv, Solution, make_instance
from energyshare.path_solver import solve_path_instance
from energyshare.validator import coverage_profile, validate

EPS = F(1, 10)


def eps_instance():
    return make_instance(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)], [(1, 3 + EPS), (2, 1 - EPS)])


def test_eps_transfer_solution_is_valid():
    inst = eps_instance()
    sol = solve_path_instance(inst).solution
    rep = validate(inst, sol)
    assert rep.valid
    assert rep.movement + sum(rep.residuals.values()) == 4


def test_halved_transfer_is_caught():
    inst = eps_instance()
    sol = solve_path_instance(inst).solution
    events = {}
    for a, evs in sol.events.items():
        events[a] = [replace(ev, amount=ev.amount / 2) if isinstance(ev, (Give, Recv)) and ev.amount else ev
                     for ev in evs]
    rep = validate(inst, Solution(events))
    assert not rep.valid
    assert rep.energy_violations or rep.schedule_deadlock


def test_mutual_wait_deadlock():
    inst = make_instance(2, [(0, 1, 2)], [(0, 1), (1, 1)])
    # each gives only after receiving from the other
    sol = Solution({
        0: [Recv(1, 0, F(1)), Give(1, F(1), 0)],
        1: [Recv(0, 0, F(1)), Give(0, F(1), 0)],
    })
    rep = validate(inst, sol)
    assert not rep.valid


def test_rendezvous_deadlock_set_of_two():
    inst = make_instance(2, [(0, 1, 2)], [(0, 2), (1, 2)])
    sol = Solution({
        0: [Recv(1, 0, F(1)), Move(0, F(0), F(2)), Give(1, F(1), 1)],
        1: [Recv(0, 1, F(1)), Move(0, F(2), F(0), False), Give(0, F(1), 0)],
    })
    rep = validate(inst, sol)
    assert rep.schedule_deadlock == {0, 1}


def test_gap_reported():
    inst = make_instance(2, [(0, 1, 2)], [(0, 5)])
    rep = validate(inst, Solution({0: [Move(0, F(0), F(1))]}))
    assert rep.coverage_gaps == [(0, F(1), F(2))]


def test_bad_references_do_not_raise():
    inst = make_instance(2, [(0, 1, 2)], [(0, 5)])
    rep = validate(inst, Solution({0: [Move(7, F(0), F(1))], 3: []}))
    assert not rep.valid


def test_discontinuous_walk():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 1)], [(0, 5)])
    rep = validate(inst, Solution({0: [Move(1, F(0), F(1)), Move(0, F(0), F(1))]}))
    assert rep.continuity_errors


def test_shortfall_on_move():
    inst = make_instance(2, [(0, 1, 2)], [(0, 1)])
    rep = validate(inst, Solution({0: [Move(0, F(0), F(2))]}))
    assert not rep.valid
    assert rep.energy_violations or rep.schedule_deadlock


def test_vertex_and_edge_offset_points_match():
    inst = make_instance(2, [(0, 1, 1)], [(0, 0), (1, 2)])
    sol = Solution({
        0: [Recv(1, 0, F(1)), Move(0, F(0), F(1))],
        1: [Move(0, F(1), F(0), False), Give(0, F(1), (0, F(0)))],
    })
    rep = validate(inst, sol)
    assert rep.valid
    assert rep.residuals == {0: 0, 1: 0}


def test_coverage_profile_examples():
    inst = make_instance(2, [(0, 1, 2)], [(0, 5), (1, 5)])
    full = coverage_profile(inst, Solution({0: [Move(0, F(0), F(2))], 1: []}))
    assert full[0] == [(F(0), F(2))]
    halves = Solution({0: [Move(0, F(0), F(1))], 1: [Move(0, F(2), F(1), False)]})
    assert coverage_profile(inst, halves)[0] == [(F(0), F(2))]
    assert coverage_profile(inst, Solution({0: [Move(0, F(0), F(1))], 1: []}))[0] == [(F(0), F(1))]


def test_report_json_shape():
    inst = eps_instance()
    d = validate(inst, solve_path_instance(inst).solution).to_dict()
    assert d["verdict"] == "valid"
    assert set(d["totals"]) == {"movement", "residuals"}
