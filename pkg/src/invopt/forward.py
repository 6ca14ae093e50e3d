"""Forward (argmax) solvers used for prediction.

Each kind has a plain solver taking weights and an ``allowed`` mask.
:func:`best_structure` wraps it with a deterministic tie rule: among
optimal structures it returns the one whose sorted id sequence is
lexicographically smallest.
"""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graphcore import Instance, InstanceError
from .matroid import Matroid


class NoStructureError(ValueError):
    """The instance has no feasible structure (e.g. no perfect matching)."""


Solver = Callable[[np.ndarray, np.ndarray], "frozenset[int] | None"]


def greedy_basis(m: Matroid, w, allowed) -> frozenset[int] | None:
    """Maximum-weight basis by the greedy rule; None if ``allowed`` loses rank."""
    order = sorted((e for e in range(m.ground_size) if allowed[e]), key=lambda e: (-w[e], e))
    chosen: list[int] = []
    for e in order:
        if m.is_independent(chosen + [e]):
            chosen.append(e)
    if len(chosen) != m.rank():
        return None
    return frozenset(chosen)


def max_arborescence(node_count: int, arcs, w, root: int, allowed=None) -> frozenset[int] | None:
    """Maximum-weight spanning arborescence rooted at ``root`` (Chu-Liu/Edmonds)."""
    if allowed is None:
        allowed = np.ones(len(arcs), dtype=bool)
    edges = [(u, v, float(w[a]), a) for a, (u, v) in enumerate(arcs)
             if allowed[a] and u != v and v != root]
    return _edmonds(node_count, edges, root)


def _edmonds(n: int, edges, root: int) -> frozenset[int] | None:
    best: dict[int, tuple] = {}
    for e in edges:
        u, v, wt, a = e
        cur = best.get(v)
        if cur is None or wt > cur[2] or (wt == cur[2] and a < cur[3]):
            best[v] = e
    if any(v not in best for v in range(n) if v != root):
        return None
    # look for a cycle among the chosen in-arcs
    color = [0] * n
    cycle = None
    for start in range(n):
        path, v = [], start
        while v != root and color[v] == 0:
            color[v] = 1
            path.append(v)
            v = best[v][0]
        if v != root and color[v] == 1 and v in path:
            cycle = path[path.index(v):]
        for x in path:
            color[x] = 2
        if cycle:
            break
    if cycle is None:
        return frozenset(best[v][3] for v in range(n) if v != root)

    in_cycle = set(cycle)
    label, k = {}, 0
    for v in range(n):
        if v not in in_cycle:
            label[v] = k
            k += 1
    c = k
    for v in in_cycle:
        label[v] = c
    entering_head = {}
    contracted = []
    for u, v, wt, a in edges:
        if u in in_cycle and v in in_cycle:
            continue
        if v in in_cycle:
            contracted.append((label[u], c, wt - best[v][2], a))
            entering_head[a] = v
        else:
            contracted.append((label[u], label[v], wt, a))
    sub = _edmonds(k + 1, contracted, label[root])
    if sub is None:
        return None
    enter = next(a for a in sub if a in entering_head)
    head = entering_head[enter]
    return frozenset(sub) | {best[v][3] for v in cycle if v != head}


def max_perfect_matching(left: int, right: int, edges, w, allowed=None) -> frozenset[int] | None:
    if left != right:
        return None
    if allowed is None:
        allowed = np.ones(len(edges), dtype=bool)
    w = np.asarray(w, dtype=float)
    big = 4.0 * (left + 1) * (1.0 + (np.abs(w).max() if len(w) else 0.0))
    score = np.full((left, right), -big)
    ids = -np.ones((left, right), dtype=int)
    for e, (x, y) in enumerate(edges):
        if allowed[e]:
            score[x, y] = w[e]
            ids[x, y] = e
    rows, cols = linear_sum_assignment(score, maximize=True)
    picked = ids[rows, cols]
    if np.any(picked < 0):
        return None
    return frozenset(int(e) for e in picked)


def plain_solver(inst: Instance) -> Solver:
    """Argmax solver for the kind of ``inst`` (maximization orientation)."""
    k = inst.kind
    if k == "matroid":
        m = inst.matroids[0].build()
        return lambda w, allowed: greedy_basis(m, w, allowed)
    if k == "arborescence":
        g = inst.digraph
        return lambda w, allowed: max_arborescence(g.node_count, g.arcs, w, inst.root, allowed)
    if k == "perfect-matching":
        b = inst.bipartite
        return lambda w, allowed: max_perfect_matching(b.left_count, b.right_count, b.edges, w, allowed)
    raise InstanceError(f"no forward solver for kind {k!r}")


def best_structure(inst: Instance, weights, forbidden: Iterable[int] = ()) -> frozenset[int]:
    """Best structure under ``weights`` in the instance's sense, ties broken lexicographically.

    Raises :class:`NoStructureError` when nothing feasible avoids ``forbidden``.
    """
    w = np.asarray(weights, dtype=float)
    if not inst.maximize:
        w = -w
    solve = plain_solver(inst)
    allowed = np.ones(len(w), dtype=bool)
    allowed[list(forbidden)] = False
    first = solve(w, allowed)
    if first is None:
        raise NoStructureError(f"no feasible {inst.kind} structure")
    target = float(w[list(first)].sum())
    tol = 1e-9 * (1.0 + np.abs(w).sum())
    bonus = 1.0 + 2.0 * np.abs(w).sum()
    forced: list[int] = []
    for e in range(len(w)):
        if len(forced) == len(first):
            break
        if not allowed[e]:
            continue
        trial = forced + [e]
        boosted = w.copy()
        boosted[trial] += bonus
        got = solve(boosted, allowed)
        if got is not None and set(trial) <= got and w[list(got)].sum() >= target - tol:
            forced = trial
        else:
            allowed[e] = False
    return frozenset(forced)
