"""Closed-form golden cases.

Each case has a single active constraint, so the answer is the projection of
``w`` onto one halfspace ``a . w' >= b``:
``w' = w + max(0, b - a.w) / |a|^2 * a``.
"""
from __future__ import annotations

import numpy as np

from . import qpsolve
from .graphcore import instance_from_dict
from .solvers import solve_instance

TOL = 1e-6


def halfspace_projection(w, a, b):
    w = np.asarray(w, dtype=float)
    a = np.asarray(a, dtype=float)
    step = max(0.0, b - a @ w) / (a @ a)
    return w + step * a


GOLDEN = [
    ("matroid two-edge", {
        "kind": "matroid", "uniform": {"rank": 1}, "weights": [1, 2], "designated": [0],
        "delta": 1}, ([1, -1], 1)),
    ("triangle spanning tree", {
        "kind": "matroid", "digraph": {"nodes": 3, "arcs": [[0, 1], [1, 2], [0, 2]]},
        "weights": [3, 2, 1], "designated": [0, 1], "delta": 2}, ([0, 1, -1], 2)),
    ("perfect matching 2x2", {
        "kind": "perfect-matching",
        "bipartite": {"left": 2, "right": 2, "edges": [[0, 0], [0, 1], [1, 0], [1, 1]]},
        "weights": [2, 1, 1, 2], "designated": [0, 3], "delta": 3}, ([1, -1, -1, 1], 3)),
    ("min-cost flow, parallel arcs", {
        "kind": "min-cost-flow", "digraph": {"nodes": 2, "arcs": [[0, 1], [0, 1], [0, 1]]},
        "capacities": [1, 1, 1], "flow": [1, 1, 0], "source": 0, "sink": 1,
        "weights": [1, 3, 2], "delta": 0}, ([0, -1, 1], 0)),
    ("shortest-path tree with shortcut", {
        "kind": "sp-tree", "digraph": {"nodes": 3, "arcs": [[0, 1], [1, 2], [0, 2]]},
        "root": 0, "weights": [1, 1, 1.5], "designated": [0, 1], "delta": 1}, ([-1, -1, 1], 1)),
    ("s-t diamond", {
        "kind": "st-path", "digraph": {"nodes": 4, "arcs": [[0, 1], [1, 3], [0, 2], [2, 3]]},
        "source": 0, "sink": 3, "weights": [1, 1, 1, 1], "designated": [0, 1], "delta": 1},
     ([-1, -1, 1, 1], 1)),
    ("s-t parallel arcs", {
        "kind": "st-path", "digraph": {"nodes": 2, "arcs": [[0, 1], [0, 1]]},
        "source": 0, "sink": 1, "weights": [1, 2], "designated": [0], "delta": 2}, ([-1, 1], 2)),
]


def run_golden(settings: qpsolve.SolverSettings | None = None):
    """``[(name, ok, detail)]`` for every golden case."""
    results = []
    for name, doc, (a, b) in GOLDEN:
        inst = instance_from_dict(doc)
        expected = halfspace_projection(inst.weights, a, b)
        exp_obj = float(np.sum((expected - inst.weights) ** 2))
        sol = solve_instance(inst, settings)
        if not sol.ok:
            results.append((name, False, f"solver status {sol.status}"))
            continue
        err_w = float(np.max(np.abs(sol.weights - expected)))
        err_obj = abs(sol.objective - exp_obj)
        ok = err_w <= TOL and err_obj <= TOL
        results.append((name, ok, f"objective {sol.objective:.9g} (expected {exp_obj:.9g}), "
                                  f"max weight error {err_w:.2e}"))
    return results
