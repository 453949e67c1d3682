"""Independent checker for proposed solutions.

A solution is valid when every edge is fully traversed, every give has a
matching receive at the same point, no agent ever spends energy it does not
have, and the transfers admit a global time order.  Transfers are modelled
as rendezvous: the giver and the receiver must both stand at the transfer
point, so a transfer executes only once both agents have reached it in
their own event sequences.  Waiting is free.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import Give, Instance, Move, Point, Recv, Solution, fmt_fraction, point_to_json


@dataclass
class ValidationReport:
    coverage_gaps: list[tuple[int, Fraction, Fraction]] = field(default_factory=list)
    energy_violations: list[tuple[int, int, Fraction]] = field(default_factory=list)
    continuity_errors: list[str] = field(default_factory=list)
    matching_errors: list[str] = field(default_factory=list)
    schedule_deadlock: set[int] | None = None
    movement: Fraction = Fraction(0)
    residuals: dict[int, Fraction] = field(default_factory=dict)
    execution_order: list[tuple[int, int]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (
            self.coverage_gaps
            or self.energy_violations
            or self.continuity_errors
            or self.matching_errors
            or self.schedule_deadlock
        )

    @property
    def verdict(self) -> str:
        return "valid" if self.valid else "invalid"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "coverage_gaps": [
                {"edge": e, "from": fmt_fraction(a), "to": fmt_fraction(b)} for e, a, b in self.coverage_gaps
            ],
            "energy_violations": [
                {"agent": a, "event": i, "shortfall": fmt_fraction(s)} for a, i, s in self.energy_violations
            ],
            "continuity_errors": list(self.continuity_errors),
            "matching_errors": list(self.matching_errors),
            "schedule_deadlock": sorted(self.schedule_deadlock) if self.schedule_deadlock else None,
            "totals": {
                "movement": fmt_fraction(self.movement),
                "residuals": {str(a): fmt_fraction(r) for a, r in sorted(self.residuals.items())},
            },
        }


def _merge(intervals: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    out: list[list[Fraction]] = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def coverage_profile(inst: Instance, sol: Solution) -> dict[int, list[tuple[Fraction, Fraction]]]:
    """Exact union of traversed sub-intervals per edge (only edges that were touched)."""
    raw: dict[int, list[tuple[Fraction, Fraction]]] = {}
    m = inst.graph.m
    for evs in sol.events.values():
        for ev in evs:
            if isinstance(ev, Move) and 0 <= ev.edge < m:
                lo, hi = sorted((Fraction(ev.frm), Fraction(ev.to)))
                raw.setdefault(ev.edge, []).append((lo, hi))
    return {e: _merge(iv) for e, iv in raw.items()}


def _gaps(w: Fraction, covered: list[tuple[Fraction, Fraction]] | None) -> list[tuple[Fraction, Fraction]]:
    if not covered:
        return [(Fraction(0), w)]
    gaps = []
    pos = Fraction(0)
    for a, b in covered:
        if a > pos:
            gaps.append((pos, a))
        pos = max(pos, b)
    if pos < w:
        gaps.append((pos, w))
    return gaps


def validate(inst: Instance, sol: Solution) -> ValidationReport:
    """Check ``sol`` against ``inst``; never raises on bad solution content."""
    g = inst.graph
    rep = ValidationReport()
    agents = {a.id: a for a in inst.agents}

    for aid in sol.events:
        if aid not in agents:
            rep.continuity_errors.append(f"solution mentions unknown agent {aid}")

    def canon(p: Point) -> Point | None:
        try:
            if isinstance(p, int):
                return p if 0 <= p < g.n else None
            eid, off = p
            if not 0 <= eid < g.m or not 0 <= off <= g.edges[eid].w:
                return None
            return g.canonical_point(p)
        except (TypeError, ValueError):
            return None

    give_amounts: dict[tuple[int, int], list[Fraction]] = {}
    for aid, evs in sol.events.items():
        for ev in evs:
            if isinstance(ev, Give):
                give_amounts.setdefault((aid, ev.to), []).append(Fraction(ev.amount))

    # per-agent walk: continuity, static energy levels, transfer endpoints
    gives: dict[tuple[int, int], list[tuple[int, Give]]] = {}
    recvs: dict[tuple[int, int], list[tuple[int, Recv]]] = {}
    for aid, a in agents.items():
        evs = sol.events.get(aid, [])
        pos = g.canonical_point(a.at)
        energy = a.energy
        for idx, ev in enumerate(evs):
            if isinstance(ev, Move):
                if not 0 <= ev.edge < g.m:
                    rep.continuity_errors.append(f"agent {aid} event {idx}: unknown edge {ev.edge}")
                    continue
                e = g.edges[ev.edge]
                if not (0 <= ev.frm <= e.w and 0 <= ev.to <= e.w):
                    rep.continuity_errors.append(f"agent {aid} event {idx}: offset outside edge {ev.edge}")
                    continue
                if e.w > 0 and ev.to != ev.frm and (ev.to > ev.frm) != ev.forward:
                    rep.continuity_errors.append(f"agent {aid} event {idx}: direction disagrees with offsets")
                start, end = ev.endpoints(g)
                if start != pos:
                    rep.continuity_errors.append(
                        f"agent {aid} event {idx}: move starts at {start!r} but agent is at {pos!r}"
                    )
                cost = ev.length
                rep.movement += cost
                if cost > energy:
                    rep.energy_violations.append((aid, idx, cost - energy))
                energy -= cost
                pos = end
            elif isinstance(ev, Give):
                at = canon(ev.at)
                if at is None or at != pos:
                    rep.continuity_errors.append(f"agent {aid} event {idx}: give away from current position")
                if ev.to not in agents or ev.to == aid:
                    rep.matching_errors.append(f"agent {aid} event {idx}: bad receiver {ev.to}")
                if ev.amount <= 0:
                    rep.matching_errors.append(f"agent {aid} event {idx}: non-positive amount")
                if ev.amount > energy:
                    rep.energy_violations.append((aid, idx, ev.amount - energy))
                energy -= ev.amount
                gives.setdefault((aid, ev.to), []).append((idx, ev))
            elif isinstance(ev, Recv):
                at = canon(ev.at)
                if at is None or at != pos:
                    rep.continuity_errors.append(f"agent {aid} event {idx}: recv away from current position")
                if ev.frm not in agents or ev.frm == aid:
                    rep.matching_errors.append(f"agent {aid} event {idx}: bad giver {ev.frm}")
                lst = recvs.setdefault((ev.frm, aid), [])
                # amount comes from the paired give (k-th give from frm to aid)
                amounts = give_amounts.get((ev.frm, aid), [])
                if len(lst) < len(amounts):
                    energy += amounts[len(lst)]
                lst.append((idx, ev))
            else:
                rep.continuity_errors.append(f"agent {aid} event {idx}: unknown event")
        rep.residuals[aid] = energy

    # pair gives and receives
    pairs: dict[tuple[int, int], tuple[int, int]] = {}
    for key in set(gives) | set(recvs):
        gl, rl = gives.get(key, []), recvs.get(key, [])
        if len(gl) != len(rl):
            rep.matching_errors.append(
                f"agent {key[0]} gives {len(gl)} time(s) to agent {key[1]}, which receives {len(rl)}"
            )
        for (gi, gev), (ri, rev) in zip(gl, rl):
            if canon(gev.at) != canon(rev.at):
                rep.matching_errors.append(
                    f"transfer {key[0]}->{key[1]}: give at {point_to_json(gev.at)} but recv at {point_to_json(rev.at)}"
                )
            pairs[(key[0], gi)] = (key[1], ri)
            pairs[(key[1], ri)] = (key[0], gi)

    # coverage
    prof = coverage_profile(inst, sol)
    for eid, e in enumerate(g.edges):
        covered = prof.get(eid)
        if e.w == 0:
            if covered is None:
                rep.coverage_gaps.append((eid, Fraction(0), Fraction(0)))
            continue
        for a, b in _gaps(e.w, covered):
            rep.coverage_gaps.append((eid, a, b))

    # schedulability: greedy rendezvous simulation to a fixpoint
    ptr = {aid: 0 for aid in agents}
    seqs = {aid: sol.events.get(aid, []) for aid in agents}
    progress = True
    while progress:
        progress = False
        for aid in agents:
            evs = seqs[aid]
            while ptr[aid] < len(evs):
                ev = evs[ptr[aid]]
                if isinstance(ev, Move):
                    rep.execution_order.append((aid, ptr[aid]))
                    ptr[aid] += 1
                    progress = True
                    continue
                partner = pairs.get((aid, ptr[aid]))
                if partner is None:
                    break
                other, oidx = partner
                if ptr[other] != oidx:
                    break
                rep.execution_order.append((aid, ptr[aid]))
                rep.execution_order.append((other, oidx))
                ptr[aid] += 1
                ptr[other] += 1
                progress = True
    blocked = {aid for aid in agents if ptr[aid] < len(seqs[aid])}
    if blocked:
        rep.schedule_deadlock = blocked
    return rep

