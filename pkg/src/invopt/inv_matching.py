"""Inverse maximum-weight bipartite perfect matching.

Alternating cycles of the bipartite graph are contracted onto the left side:
an arc ``x -> z`` means "x gives up its partner y = M(x) and y is re-matched
to z".  Directed cycles of this auxiliary graph are exactly the alternating
cycles, so the compact cycle bound on it encodes optimality with margin.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .cyclebound import (Length, SymbolicDigraph, r1_constraints_enumerated,
                         r2_constraints)
from .graphcore import BipartiteGraph
from .inv_matroid import Formulation, StructureError, _new_weights


@dataclass(frozen=True)
class AuxGraphH:
    left_count: int
    arcs: tuple[tuple[int, int], ...]
    matched_edge: tuple[int, ...]  # per arc: edge (x, M(x))
    other_edge: tuple[int, ...]    # per arc: edge (M(x), z)
    mate: np.ndarray               # left vertex -> matched right vertex
    mate_edge: np.ndarray          # left vertex -> matched edge id

    def symbolic(self, weight_vars) -> SymbolicDigraph:
        lengths = [Length.linear([(weight_vars[m], 1.0), (weight_vars[o], -1.0)])
                   for m, o in zip(self.matched_edge, self.other_edge)]
        return SymbolicDigraph(self.left_count, list(self.arcs), lengths,
                               labels=list(zip(self.matched_edge, self.other_edge)))

    def numeric_lengths(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return w[list(self.matched_edge)] - w[list(self.other_edge)]


def check_perfect_matching(g: BipartiteGraph, matching: Iterable[int]) -> None:
    matching = sorted(set(matching))
    if g.left_count != g.right_count:
        raise StructureError("a perfect matching needs equal sides")
    if any(not 0 <= e < g.edge_count for e in matching):
        raise StructureError("matching references a missing edge")
    lefts = {g.edges[e][0] for e in matching}
    rights = {g.edges[e][1] for e in matching}
    if len(matching) != g.left_count or len(lefts) != len(matching) or len(rights) != len(matching):
        raise StructureError("edge set is not a perfect matching")


def build_aux_graph(g: BipartiteGraph, matching: Iterable[int]) -> AuxGraphH:
    check_perfect_matching(g, matching)
    n = g.left_count
    mate = np.empty(n, dtype=int)
    mate_edge = np.empty(n, dtype=int)
    for e in matching:
        x, y = g.edges[e]
        mate[x], mate_edge[x] = y, e
    edges_at_right: list[list[int]] = [[] for _ in range(g.right_count)]
    for e, (_, y) in enumerate(g.edges):
        edges_at_right[y].append(e)
    arcs, m_ids, o_ids = [], [], []
    for x in range(n):
        for e in edges_at_right[mate[x]]:
            z = g.edges[e][0]
            if z == x:  # the matched edge itself; no alternating cycle
                continue
            arcs.append((x, z))
            m_ids.append(int(mate_edge[x]))
            o_ids.append(e)
    return AuxGraphH(n, tuple(arcs), tuple(m_ids), tuple(o_ids), mate, mate_edge)


def matching_formulation(g: BipartiteGraph, matching: Iterable[int], delta: float,
                         compact: bool = True) -> Formulation:
    if delta < 0:
        raise ValueError("delta must be non-negative")
    h = build_aux_graph(g, matching)
    system, wv, fixed = _new_weights(g.edge_count, None)
    sym = h.symbolic(wv)
    if compact:
        r2_constraints(sym, delta, system)
    else:
        r1_constraints_enumerated(sym, delta, system)
    system.meta["aux_graph"] = h
    return Formulation(system, wv, fixed)


def inverse_perfect_matching(g: BipartiteGraph, w, matching: Iterable[int], delta: float,
                             settings=None):
    """Least-squares weights making ``matching`` the maximum by margin ``delta``."""
    return matching_formulation(g, matching, delta).solve(w, settings)


def cycle_to_alternating(h: AuxGraphH, cycle: Iterable[int]):
    """Matched and non-matched edge ids of the alternating cycle behind an H-cycle."""
    cycle = list(cycle)
    return ([h.matched_edge[a] for a in cycle], [h.other_edge[a] for a in cycle])
