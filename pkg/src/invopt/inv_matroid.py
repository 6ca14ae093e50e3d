"""Inverse problems over matroid bases and common bases of two matroids.

A single matroid needs one row per (basis element, outside element) pair on
a fundamental circuit.  For two matroids the designated common basis is
optimal with margin exactly when the exchange graph has no short directed
cycle, which is compiled with :func:`invopt.cyclebound.r2_constraints`.
Arborescences and shortest s-t paths are handled as common bases of a
graphic and a partition matroid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import qpsolve
from .cyclebound import (ConstraintSystem, Length, SymbolicDigraph,
                         r1_constraints_enumerated, r2_constraints)
from .graphcore import Digraph
from .matroid import (Matroid, MatroidError, arborescence_matroids,
                      fundamental_circuit, is_basis)


class StructureError(ValueError):
    """The designated solution is not feasible for its problem kind."""


@dataclass
class Formulation:
    """A constraint system plus the variable carrying each element weight.

    ``weight_vars[e]`` is ``None`` for elements held at ``fixed[e]``.
    """

    system: ConstraintSystem
    weight_vars: list[int | None]
    fixed: dict[int, float]

    def problem(self, w) -> qpsolve.QpProblem:
        anchors = [(v, w[e]) for e, v in enumerate(self.weight_vars) if v is not None]
        return qpsolve.QpProblem(self.system, anchors)

    def solve(self, w, settings=None) -> qpsolve.QpSolution:
        w = np.asarray(w, dtype=float)
        sol = qpsolve.solve(self.problem(w), settings)
        if sol.ok:
            out = w.copy()
            for e, v in enumerate(self.weight_vars):
                out[e] = self.fixed[e] if v is None else sol.x[v]
            sol.weights = out
            sol.objective = float(np.sum((out - w) ** 2))
        return sol

    def weight_point(self, w) -> np.ndarray:
        """A full variable vector carrying ``w`` in the weight slots (others zero)."""
        x = np.zeros(self.system.n_vars)
        for e, v in enumerate(self.weight_vars):
            if v is not None:
                x[v] = w[e]
        return x


def _new_weights(size: int, fixed: Mapping[int, float] | None):
    fixed = dict(fixed or {})
    system = ConstraintSystem()
    wv = [None if e in fixed else system.add_variable(f"w[{e}]", "weight") for e in range(size)]
    return system, wv, fixed


def _term(wv, fixed, e: int, sign: float) -> Length:
    if wv[e] is None:
        return Length.fixed(sign * fixed[e])
    return Length.ref(wv[e], sign)


# -- single matroid -----------------------------------------------------------

def matroid_formulation(m: Matroid, basis: Iterable[int], delta: float) -> Formulation:
    basis = frozenset(basis)
    if not is_basis(m, basis):
        raise StructureError("designated set is not a basis")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    system, wv, fixed = _new_weights(m.ground_size, None)
    for f in range(m.ground_size):
        if f in basis:
            continue
        for e in sorted(fundamental_circuit(m, basis, f) - {f}):
            system.add_row([(wv[e], 1.0), (wv[f], -1.0)], ">=", delta, "exchange")
    return Formulation(system, wv, fixed)


def inverse_matroid(m: Matroid, w, basis: Iterable[int], delta: float,
                    settings=None) -> qpsolve.QpSolution:
    """Least-squares weights under which ``basis`` wins every exchange by ``delta``."""
    return matroid_formulation(m, basis, delta).solve(w, settings)


# -- exchange graph -----------------------------------------------------------

@dataclass(frozen=True)
class ExchangeGraph:
    size: int
    basis: frozenset[int]
    a1: tuple[tuple[int, int], ...]  # (x in B, y outside): B - x + y independent in M1
    a2: tuple[tuple[int, int], ...]  # (y outside, x in B): B - x + y independent in M2

    @property
    def arcs(self) -> list[tuple[int, int]]:
        return list(self.a1) + list(self.a2)

    def symbolic(self, weight_vars, fixed=None) -> SymbolicDigraph:
        """Arc lengths ``+w(x)`` on the first family and ``-w(y)`` on the second."""
        fixed = fixed or {}
        lengths = [_term(weight_vars, fixed, x, 1.0) for x, _ in self.a1]
        lengths += [_term(weight_vars, fixed, y, -1.0) for y, _ in self.a2]
        return SymbolicDigraph(self.size, self.arcs, lengths)

    def numeric_lengths(self, w) -> np.ndarray:
        return np.array([w[x] for x, _ in self.a1] + [-w[y] for y, _ in self.a2], dtype=float)


def exchange_graph(m1: Matroid, m2: Matroid, basis: Iterable[int]) -> ExchangeGraph:
    basis = frozenset(basis)
    if m1.ground_size != m2.ground_size:
        raise MatroidError("matroids must share a ground set")
    if not (is_basis(m1, basis) and is_basis(m2, basis)):
        raise StructureError("designated set is not a common basis")
    outside = [y for y in range(m1.ground_size) if y not in basis]
    a1, a2 = [], []
    for x in sorted(basis):
        rest = basis - {x}
        for y in outside:
            swapped = rest | {y}
            if m1.is_independent(swapped):
                a1.append((x, y))
            if m2.is_independent(swapped):
                a2.append((y, x))
    return ExchangeGraph(m1.ground_size, basis, tuple(a1), tuple(a2))


def intersection_formulation(m1: Matroid, m2: Matroid, basis: Iterable[int], delta: float,
                             fixed: Mapping[int, float] | None = None,
                             compact: bool = True) -> Formulation:
    """Exchange graph lengths bound to weights, plus the cycle bound.

    ``compact=False`` swaps the distance-variable encoding for one row per
    simple cycle (reference use only).
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    g = exchange_graph(m1, m2, basis)
    system, wv, fixed = _new_weights(m1.ground_size, fixed)
    sym = g.symbolic(wv, fixed)
    if compact:
        r2_constraints(sym, delta, system)
    else:
        r1_constraints_enumerated(sym, delta, system)
    system.meta["exchange_graph"] = g
    return Formulation(system, wv, fixed)


def inverse_matroid_intersection(m1: Matroid, m2: Matroid, w, basis: Iterable[int],
                                 delta: float, fixed: Mapping[int, float] | None = None,
                                 settings=None) -> qpsolve.QpSolution:
    return intersection_formulation(m1, m2, basis, delta, fixed).solve(w, settings)


# -- arborescences and s-t paths ---------------------------------------------

def check_arborescence(g: Digraph, arcs: Iterable[int], root: int) -> None:
    arcs = sorted(set(arcs))
    n = g.node_count
    if any(not 0 <= a < g.arc_count for a in arcs):
        raise StructureError("arborescence references a missing arc")
    parent: dict[int, int] = {}
    for a in arcs:
        t, h = g.arcs[a]
        if h == root:
            raise StructureError("an arborescence has no arc into its root")
        if h in parent:
            raise StructureError(f"node {h} has two incoming arcs")
        parent[h] = t
    if len(parent) != n - 1:
        raise StructureError("arborescence must reach every node")
    for v in range(n):
        seen = set()
        while v != root:
            if v in seen:
                raise StructureError("arborescence contains a directed cycle")
            seen.add(v)
            v = parent[v]


def arborescence_formulation(g: Digraph, arcs: Iterable[int], root: int, delta: float,
                             fixed: Mapping[int, float] | None = None,
                             compact: bool = True) -> Formulation:
    check_arborescence(g, arcs, root)
    m1, m2 = arborescence_matroids(g.node_count, g.arcs, root)
    return intersection_formulation(m1, m2, arcs, delta, fixed, compact)


def inverse_arborescence(g: Digraph, w, arcs: Iterable[int], root: int, delta: float,
                         sense: str = "max", fixed: Mapping[int, float] | None = None,
                         settings=None) -> qpsolve.QpSolution:
    """Inverse maximum (or minimum) weight r-arborescence.

    The minimum version runs the maximum one on negated weights and negates
    the answer back.
    """
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    sign = 1.0 if sense == "max" else -1.0
    w = np.asarray(w, dtype=float)
    fx = {e: sign * v for e, v in (fixed or {}).items()}
    sol = arborescence_formulation(g, arcs, root, delta, fx).solve(sign * w, settings)
    if sol.ok:
        sol.weights = sign * sol.weights
    return sol


def formulation_size(g: Digraph, arcs: Iterable[int], root: int) -> dict[str, int]:
    """Variable and row counts of the compact arborescence program."""
    form = arborescence_formulation(g, arcs, root, 0.0)
    s = form.system
    ex = s.meta["exchange_graph"]
    return {
        "nodes": g.node_count,
        "arcs": g.arc_count,
        "exchange_nodes": ex.size,
        "exchange_arcs": len(ex.arcs),
        "variables": s.n_vars,
        "weight_variables": len(s.variables("weight")),
        "length_variables": len(s.variables("length")),
        "distance_variables": len(s.variables("distance")),
        "rows": len(s),
        "binding_rows": s.count("binding"),
        "cycle_rows": len(s) - s.count("binding"),
    }


def path_arcs_in_order(g: Digraph, arcs: Iterable[int], s: int, t: int) -> list[int]:
    """Order ``arcs`` as a simple directed s-t path or raise."""
    arcs = list(arcs)
    by_tail: dict[int, int] = {}
    for a in arcs:
        if not 0 <= a < g.arc_count:
            raise StructureError("path references a missing arc")
        tail = g.arcs[a][0]
        if tail in by_tail:
            raise StructureError("path leaves a node twice")
        by_tail[tail] = a
    order, node, seen = [], s, {s}
    while node != t:
        if node not in by_tail:
            raise StructureError("arcs do not form an s-t path")
        a = by_tail[node]
        order.append(a)
        node = g.arcs[a][1]
        if node in seen:
            raise StructureError("path revisits a node")
        seen.add(node)
    if len(order) != len(arcs):
        raise StructureError("arcs do not form a simple s-t path")
    return order


def st_path_reduction(g: Digraph, s: int, t: int, path: Iterable[int]):
    """Augmented digraph, designated arborescence and the fixed artificial arcs.

    Zero-weight arcs run from ``t`` to every other node; the designated
    arborescence is the path plus the artificial arcs into nodes off it.
    """
    order = path_arcs_in_order(g, path, s, t)
    on_path = {s} | {g.arcs[a][1] for a in order}
    extra = [(t, v) for v in range(g.node_count) if v != t]
    aug = Digraph(g.node_count, tuple(g.arcs) + tuple(extra))
    designated = set(order)
    fixed = {}
    for i, (_, v) in enumerate(extra):
        e = g.arc_count + i
        fixed[e] = 0.0
        if v not in on_path:
            designated.add(e)
    return aug, designated, fixed


def inverse_st_path(g: Digraph, w, s: int, t: int, path: Iterable[int], delta: float,
                    settings=None) -> qpsolve.QpSolution:
    """Inverse shortest s-t path through the arborescence reduction."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("shortest path weights must be non-negative")
    aug, designated, fixed = st_path_reduction(g, s, t, path)
    w_aug = np.concatenate([w, np.zeros(aug.arc_count - g.arc_count)])
    sol = inverse_arborescence(aug, w_aug, designated, s, delta, "min", fixed, settings)
    if sol.ok:
        sol.weights = sol.weights[: g.arc_count]
        sol.objective = float(np.sum((sol.weights - w) ** 2))
    return sol
