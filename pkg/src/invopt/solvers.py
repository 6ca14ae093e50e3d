"""Map an :class:`~invopt.graphcore.Instance` to its formulation and solve it.

Maximization kinds given ``sense="min"`` are solved on negated weights and
negated back.  Paths, flows and path trees are minimization only.
"""
from __future__ import annotations

import numpy as np

from . import qpsolve
from .graphcore import MAX_KINDS, Instance, InstanceError
from .inv_flowpath import FlowInstance, flow_formulation, sp_tree_formulation
from .inv_matching import matching_formulation
from .inv_matroid import (Formulation, arborescence_formulation,
                          intersection_formulation, matroid_formulation,
                          st_path_reduction)


def flow_instance(inst: Instance) -> FlowInstance:
    return FlowInstance(inst.digraph, inst.capacities, inst.flow, inst.source, inst.sink)


def orientation(inst: Instance) -> float:
    """+1 when the formulation sees ``inst.weights`` as is, -1 when negated."""
    if inst.kind == "st-path":  # minimum arborescence = maximum on negated weights
        return -1.0
    if inst.kind in MAX_KINDS:
        return 1.0 if inst.maximize else -1.0
    return 1.0


def formulation(inst: Instance, compact: bool = True) -> Formulation:
    """Constraint system over weights as seen after :func:`orientation`.

    ``compact=False`` swaps the distance encoding for enumerated cycles
    where an auxiliary graph is involved.
    """
    k = inst.kind
    if k == "matroid":
        return matroid_formulation(inst.matroids[0].build(), inst.designated, inst.delta)
    if k == "matroid-intersection":
        m1, m2 = (s.build() for s in inst.matroids)
        return intersection_formulation(m1, m2, inst.designated, inst.delta, compact=compact)
    if k == "arborescence":
        return arborescence_formulation(inst.digraph, inst.designated, inst.root, inst.delta,
                                        compact=compact)
    if k == "st-path":
        aug, designated, fixed = st_path_reduction(inst.digraph, inst.source, inst.sink,
                                                   inst.designated)
        return arborescence_formulation(aug, designated, inst.source, inst.delta, fixed, compact)
    if k == "perfect-matching":
        return matching_formulation(inst.bipartite, inst.designated, inst.delta, compact)
    if k == "min-cost-flow":
        return flow_formulation(flow_instance(inst), inst.delta, compact)
    if k == "sp-tree":
        return sp_tree_formulation(inst.digraph, inst.designated, inst.root, inst.delta)
    raise InstanceError(f"unknown kind {k!r}")


def oriented_weights(inst: Instance) -> np.ndarray:
    w = orientation(inst) * inst.weights
    if inst.kind == "st-path":
        extra = inst.digraph.node_count - 1
        w = np.concatenate([w, np.zeros(extra)])
    return w


def solve_instance(inst: Instance, settings: qpsolve.SolverSettings | None = None
                   ) -> qpsolve.QpSolution:
    """Solve the inverse problem of ``inst``; weights come back in its own orientation."""
    form = formulation(inst)
    sign = orientation(inst)
    sol = form.solve(oriented_weights(inst), settings)
    if sol.ok:
        sol.weights = sign * sol.weights[: inst.size]
        sol.objective = float(np.sum((sol.weights - inst.weights) ** 2))
    return sol
