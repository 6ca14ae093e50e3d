"""Inverse minimum-cost maximum flow and inverse shortest-path tree."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .cyclebound import (Length, SymbolicDigraph, r1_constraints_enumerated,
                         r2_constraints)
from .graphcore import Digraph
from .inv_matroid import Formulation, StructureError, _new_weights

log = logging.getLogger(__name__)

FLOW_TOL = 1e-9


@dataclass(frozen=True)
class FlowInstance:
    digraph: Digraph
    capacities: np.ndarray
    flow: np.ndarray
    source: int
    sink: int


@dataclass(frozen=True)
class ResidualGraph:
    node_count: int
    arcs: tuple[tuple[int, int], ...]
    edge: tuple[int, ...]     # original arc behind each residual arc
    sign: tuple[float, ...]   # +1 forward (spare capacity), -1 backward (positive flow)

    def symbolic(self, weight_vars) -> SymbolicDigraph:
        lengths = [Length.ref(weight_vars[e], s) for e, s in zip(self.edge, self.sign)]
        return SymbolicDigraph(self.node_count, list(self.arcs), lengths, labels=list(self.edge))

    def numeric_lengths(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return np.array([s * w[e] for e, s in zip(self.edge, self.sign)])

    def twins(self) -> list[tuple[int, int]]:
        """Pairs of residual arcs that are the two directions of one original arc."""
        where: dict[int, list[int]] = {}
        for i, e in enumerate(self.edge):
            where.setdefault(e, []).append(i)
        return [tuple(v) for v in where.values() if len(v) == 2]

    def reaches(self, s: int, t: int) -> bool:
        seen, stack = {s}, [s]
        while stack:
            u = stack.pop()
            if u == t:
                return True
            for a, b in self.arcs:
                if a == u and b not in seen:
                    seen.add(b)
                    stack.append(b)
        return False


def check_flow(fi: FlowInstance) -> None:
    g, c, f = fi.digraph, np.asarray(fi.capacities, float), np.asarray(fi.flow, float)
    if len(c) != g.arc_count or len(f) != g.arc_count:
        raise StructureError("one capacity and one flow value per arc are required")
    if np.any(c < 0):
        raise StructureError("capacities must be non-negative")
    if np.any(f < -FLOW_TOL) or np.any(f > c + FLOW_TOL):
        raise StructureError("flow violates 0 <= f <= c")
    net = np.zeros(g.node_count)
    for (u, v), x in zip(g.arcs, f):
        net[u] -= x
        net[v] += x
    for v in range(g.node_count):
        if v not in (fi.source, fi.sink) and abs(net[v]) > FLOW_TOL * (1 + np.abs(f).sum()):
            raise StructureError(f"flow conservation fails at node {v}")


def flow_value(fi: FlowInstance) -> float:
    g = fi.digraph
    out = sum(f for (u, _), f in zip(g.arcs, fi.flow) if u == fi.source)
    inc = sum(f for (_, v), f in zip(g.arcs, fi.flow) if v == fi.source)
    return float(out - inc)


def build_residual(fi: FlowInstance, require_maximum: bool = False) -> ResidualGraph:
    """Residual arcs of ``fi``; competitors are flows of the same s-t value.

    For a maximum flow these are all maximum flows.  A flow that is not
    maximum is accepted with a warning unless ``require_maximum`` is set.
    """
    check_flow(fi)
    g = fi.digraph
    arcs, edge, sign = [], [], []
    for e, ((u, v), c, f) in enumerate(zip(g.arcs, fi.capacities, fi.flow)):
        if c == 0 and f == 0:
            log.warning("arc %d has zero capacity and carries no residual arc", e)
        if f < c - FLOW_TOL:
            arcs.append((u, v)); edge.append(e); sign.append(1.0)
        if f > FLOW_TOL:
            arcs.append((v, u)); edge.append(e); sign.append(-1.0)
    res = ResidualGraph(g.node_count, tuple(arcs), tuple(edge), tuple(sign))
    if res.reaches(fi.source, fi.sink):
        if require_maximum:
            raise StructureError("flow is not maximum: the residual graph has an s-t path")
        log.warning("flow is not maximum; competitors are flows of value %g", flow_value(fi))
    return res


def transition_graph(res: ResidualGraph, weight_vars) -> SymbolicDigraph:
    """Digraph on residual arcs forbidding an immediate reversal of one original arc.

    Node ``i`` is residual arc ``i``; an arc ``i -> j`` exists when ``j``
    leaves the head of ``i`` and the two are not opposite copies of the same
    original arc.  It carries the length of ``i``, so closed walks keep their
    residual length while the zero-length push-and-undo pairs disappear.
    """
    sym = res.symbolic(weight_vars)
    arcs, lengths, labels = [], [], []
    for i, (_, hi) in enumerate(res.arcs):
        for j, (tj, _) in enumerate(res.arcs):
            if tj != hi or res.edge[i] == res.edge[j]:
                continue
            arcs.append((i, j))
            lengths.append(sym.lengths[i])
            labels.append(res.edge[i])
    return SymbolicDigraph(len(res.arcs), arcs, lengths, labels)


def flow_formulation(fi: FlowInstance, delta: float, compact: bool = True,
                     require_maximum: bool = False) -> Formulation:
    if delta < 0:
        raise ValueError("delta must be non-negative")
    res = build_residual(fi, require_maximum)
    system, wv, fixed = _new_weights(fi.digraph.arc_count, None)
    if delta > 0 and res.twins():
        sym = transition_graph(res, wv)
    else:
        sym = res.symbolic(wv)
    if compact:
        r2_constraints(sym, delta, system)
    else:
        r1_constraints_enumerated(sym, delta, system)
    system.meta["residual"] = res
    return Formulation(system, wv, fixed)


def inverse_min_cost_flow(fi: FlowInstance, w, delta: float, settings=None,
                          require_maximum: bool = False):
    """Least-squares arc costs under which every residual cycle costs at least ``delta``."""
    return flow_formulation(fi, delta, require_maximum=require_maximum).solve(w, settings)


# -- shortest-path trees ------------------------------------------------------

def check_out_tree(g: Digraph, arcs: Iterable[int], root: int) -> None:
    from .inv_matroid import check_arborescence

    check_arborescence(g, arcs, root)


def sp_tree_formulation(g: Digraph, tree: Iterable[int], root: int, delta: float) -> Formulation:
    """Weights per arc, a potential per node, tree arcs tight, others slack by ``delta``."""
    if delta < 0:
        raise ValueError("delta must be non-negative")
    tree = frozenset(tree)
    check_out_tree(g, tree, root)
    system, wv, fixed = _new_weights(g.arc_count, None)
    d = [system.add_variable(f"d[{v}]", "potential") for v in range(g.node_count)]
    system.add_row([(d[root], 1.0)], "==", 0.0, "root")
    for e, (a, b) in enumerate(g.arcs):
        terms = [(d[a], 1.0), (wv[e], 1.0), (d[b], -1.0)]
        if e in tree:
            system.add_row(terms, "==", 0.0, "tree")
        else:
            system.add_row(terms, ">=", delta, "non-tree")
    return Formulation(system, wv, fixed)


def inverse_sp_tree(g: Digraph, w, root: int, tree: Iterable[int], delta: float,
                    settings=None):
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("shortest-path tree weights must be non-negative")
    sol = sp_tree_formulation(g, tree, root, delta).solve(w, settings)
    if sol.ok and np.any(sol.weights < 0):
        log.warning("perturbed weights contain negative entries (min %g)", sol.weights.min())
    return sol
