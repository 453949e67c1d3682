"""Brute-force feasibility for tiny path instances.

Only canonical trajectory shapes are searched: every agent covers one
contiguous block ``[b_{j-1}, b_j]`` around its start, turns at most once,
and exchanges energy with a neighbour only at the shared block boundary,
receiving at its own start position.  Completeness of these shapes is the
canonical-form property of segments; the oracle depends on nothing else, in
particular not on the greedy choices of :mod:`energyshare.path_solver`.

For each pattern (transfer direction at every boundary, turn direction of
every agent) the costs are linear in the free boundaries, so the largest
energy that can flow across boundary ``j`` is a linear function of
``b_j``.  It is propagated left to right and maximised over a handful of
breakpoints, all in exact arithmetic.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .model import Instance, normalize
from .path_solver import PathEmbedding, embed

MAX_AGENTS = 3

# (cost per unit left of s, cost per unit right of s)
_TURNS = {"left-first": (2, 1), "right-first": (1, 2)}


def _boundary_domain(pattern: str, s_left: Fraction, s_right: Fraction) -> tuple[Fraction, Fraction]:
    if pattern == ">":
        return s_right, s_right
    if pattern == "<":
        return s_left, s_left
    return s_left, s_right


def _carry(pattern: str, m: Fraction | None) -> Fraction | None:
    """Energy the next agent gets when at most ``m`` may cross in ``pattern`` direction."""
    if m is None:
        return None
    if pattern == ">":
        return m if m >= 0 else None
    if pattern == "<":
        return min(m, Fraction(0))
    return Fraction(0) if m >= 0 else None


def _pattern_feasible(s: Sequence[Fraction], L: Fraction, e: Sequence[Fraction],
                      flows: Sequence[str], turns: Sequence[str]) -> bool:
    k = len(s)
    # outflow bound of the previous agent as K - beta * (b - s_prev) over b in [lo, hi]
    prev = None
    for j in range(k):
        alpha, beta = _TURNS[turns[j]]
        if j == 0:
            best = Fraction(0) - alpha * s[0]
        else:
            pat = flows[j - 1]
            lo, hi = _boundary_domain(pat, s[j - 1], s[j])
            K, b_prev, s_prev = prev
            cands = {lo, hi}
            if b_prev:
                root = s_prev + K / b_prev
                if lo < root < hi:
                    cands.add(root)
            best = None
            for b in cands:
                h = _carry(pat, K - b_prev * (b - s_prev))
                if h is None:
                    continue
                val = h - alpha * (s[j] - b)
                if best is None or val > best:
                    best = val
            if best is None:
                return False
        K = Fraction(e[j]) + best
        prev = (K, beta, s[j])
    K, beta, s_last = prev
    return K - beta * (L - s_last) >= 0


def brute_force_path(emb: PathEmbedding, energies: Sequence[Fraction]) -> bool:
    """Decide whether the embedded segment can be explored (k <= 3)."""
    k = emb.k
    if k > MAX_AGENTS:
        raise ValueError(f"brute force supports at most {MAX_AGENTS} agents, got {k}")
    if k == 0:
        return emb.length == 0
    s = emb.s
    for flows in itertools.product("<>0", repeat=k - 1):
        for turns in itertools.product(_TURNS, repeat=k):
            if _pattern_feasible(s, emb.length, energies, flows, turns):
                return True
    return False


def brute_force_instance(inst: Instance) -> bool:
    """Normalize and embed a path instance, then search it."""
    norm, _ = normalize(inst)
    emb = embed(norm)
    return brute_force_path(emb, [norm.agent(a).energy for a in emb.agent_ids])
