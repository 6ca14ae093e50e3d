"""Brute-force verifiers for desk-scale instances.

Everything here avoids the auxiliary-graph machinery: competitors are listed
directly (bases, arborescences, paths, matchings, integral flows, walks) and
reference objectives are computed with an interior-point QP solver rather
than the package's own splitting method.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import clarabel
import numpy as np
import scipy.sparse as sp

from .graphcore import Instance, InstanceError

MAX_MATROID_ELEMENTS = 12
MAX_BIPARTITE_SIDE = 6
MAX_DIGRAPH_NODES = 6
MAX_COMPETITORS = 100_000


class OracleGuardError(RuntimeError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Verdict:
    ok: bool
    worst_competitor: object
    margin: float

    def __iter__(self):  # allows ``ok, worst, margin = verify_delta_optimal(...)``
        return iter((self.ok, self.worst_competitor, self.margin))


def _count(it, limit=MAX_COMPETITORS):
    for i, item in enumerate(it):
        if i >= limit:
            raise OracleGuardError(f"more than {limit} competitors")
        yield item


# -- enumerators ----------------------------------------------------------------

def arborescences(node_count: int, arcs, root: int) -> Iterator[frozenset[int]]:
    """Every spanning out-tree rooted at ``root``: one in-arc per other node, no cycle."""
    incoming = [[a for a, (t, h) in enumerate(arcs) if h == v and t != v] for v in range(node_count)]
    others = [v for v in range(node_count) if v != root]
    if any(not incoming[v] for v in others):
        return
    for choice in itertools.product(*(incoming[v] for v in others)):
        parent = {v: arcs[a][0] for v, a in zip(others, choice)}
        ok = True
        for v in others:
            seen, u = set(), v
            while u != root:
                if u in seen:
                    ok = False
                    break
                seen.add(u)
                u = parent[u]
            if not ok:
                break
        if ok:
            yield frozenset(choice)


def simple_paths(node_count: int, arcs, s: int, t: int) -> Iterator[tuple[int, ...]]:
    out = [[a for a, (u, _) in enumerate(arcs) if u == v] for v in range(node_count)]

    def rec(v, visited, path):
        if v == t:
            yield tuple(path)
            return
        for a in out[v]:
            h = arcs[a][1]
            if h not in visited:
                yield from rec(h, visited | {h}, path + [a])

    yield from rec(s, {s}, [])


def walks(node_count: int, arcs, r: int, max_len: int) -> Iterator[tuple[int, ...]]:
    """Every walk from ``r`` with 1..max_len arcs (may revisit nodes)."""
    out = [[a for a, (u, _) in enumerate(arcs) if u == v] for v in range(node_count)]
    stack = [(r, ())]
    while stack:
        v, path = stack.pop()
        if path:
            yield path
        if len(path) < max_len:
            for a in reversed(out[v]):
                stack.append((arcs[a][1], path + (a,)))


def perfect_matchings(left: int, right: int, edges) -> Iterator[frozenset[int]]:
    if left != right:
        return
    lookup = {(x, y): e for e, (x, y) in enumerate(edges)}
    for perm in itertools.permutations(range(right)):
        ids = [lookup.get((x, perm[x])) for x in range(left)]
        if None not in ids:
            yield frozenset(ids)


def integral_flows(node_count: int, arcs, capacities, source: int, sink: int,
                   value: float) -> Iterator[np.ndarray]:
    """Integral flows of the given s-t value within the (floored) capacities."""
    caps = [int(math.floor(c + 1e-9)) for c in capacities]
    total = math.prod(c + 1 for c in caps)
    if total > 50 * MAX_COMPETITORS:
        raise OracleGuardError(f"{total} candidate flow vectors")
    m = len(arcs)
    inc = np.zeros((node_count, m))
    for e, (u, v) in enumerate(arcs):
        inc[u, e] -= 1
        inc[v, e] += 1
    inner = [v for v in range(node_count) if v not in (source, sink)]
    grid = np.array(list(itertools.product(*(range(c + 1) for c in caps))), dtype=float).reshape(-1, m)
    bal = grid @ inc.T
    keep = np.all(np.abs(bal[:, inner]) < 1e-9, axis=1) & (np.abs(-bal[:, source] - value) < 1e-9)
    yield from grid[keep]


def tree_path(g, tree, root: int, v: int) -> tuple[int, ...]:
    into = {g.arcs[a][1]: a for a in tree}
    path = []
    while v != root:
        a = into[v]
        path.append(a)
        v = g.arcs[a][0]
    return tuple(reversed(path))


# -- competitor rows --------------------------------------------------------------

def _indicator(size: int, ids) -> np.ndarray:
    x = np.zeros(size)
    for e in ids:
        x[e] += 1.0
    return x


def _guard(inst: Instance) -> None:
    k = inst.kind
    if k in ("matroid", "matroid-intersection") and inst.size > MAX_MATROID_ELEMENTS:
        raise OracleGuardError(f"{inst.size} ground elements exceed {MAX_MATROID_ELEMENTS}")
    if k == "perfect-matching":
        b = inst.bipartite
        if max(b.left_count, b.right_count) > MAX_BIPARTITE_SIDE:
            raise OracleGuardError("bipartite side too large")
    if inst.digraph is not None and k != "matroid":
        if inst.digraph.node_count > MAX_DIGRAPH_NODES:
            raise OracleGuardError("digraph too large")


def competitor_rows(inst: Instance) -> list[tuple[object, np.ndarray]]:
    """``(competitor, d)`` pairs; the designated solution wins by ``d @ w``.

    For maximization ``d`` is the designated incidence vector minus the
    competitor's, for minimization the reverse.  Shortest-path trees get one
    row per (node, walk from the root) other than the tree path.
    """
    _guard(inst)
    k, n = inst.kind, inst.size
    if k == "sp-tree":
        g = inst.digraph
        rows = []
        paths = {v: tree_path(g, inst.designated, inst.root, v) for v in range(g.node_count)}
        for wk in _count(walks(g.node_count, g.arcs, inst.root, g.node_count)):
            v = g.arcs[wk[-1]][1]
            if wk != paths[v]:
                rows.append(((v, wk), _indicator(n, wk) - _indicator(n, paths[v])))
        return rows
    if k == "min-cost-flow":
        f = np.asarray(inst.flow, dtype=float)
        if np.any(np.abs(f - np.round(f)) > 1e-9):
            raise OracleGuardError("flow enumeration needs an integral designated flow")
        from .inv_flowpath import flow_value
        from .solvers import flow_instance

        value = flow_value(flow_instance(inst))
        g = inst.digraph
        return [(tuple(int(x) for x in fp), fp - f) for fp in
                _count(integral_flows(g.node_count, g.arcs, inst.capacities,
                                      inst.source, inst.sink, value))
                if np.any(np.abs(fp - f) > 1e-9)]

    if k == "matroid":
        from .matroid import enumerate_bases

        sols = enumerate_bases(inst.matroids[0].build())
    elif k == "matroid-intersection":
        from .matroid import enumerate_common_bases

        sols = enumerate_common_bases(*(s.build() for s in inst.matroids))
    elif k == "arborescence":
        sols = arborescences(inst.digraph.node_count, inst.digraph.arcs, inst.root)
    elif k == "st-path":
        g = inst.digraph
        sols = (frozenset(p) for p in simple_paths(g.node_count, g.arcs, inst.source, inst.sink))
    elif k == "perfect-matching":
        b = inst.bipartite
        sols = perfect_matchings(b.left_count, b.right_count, b.edges)
    else:
        raise InstanceError(f"unknown kind {k!r}")
    sign = 1.0 if inst.maximize else -1.0
    own = _indicator(n, inst.designated)
    return [(s, sign * (own - _indicator(n, s))) for s in _count(sols) if s != inst.designated]


def verify_delta_optimal(inst: Instance, w_prime, tol: float = 1e-6) -> Verdict:
    """Does the designated solution beat every competitor by ``delta - tol`` under ``w_prime``?

    The margin is ``+inf`` when there is no competitor.
    """
    w_prime = np.asarray(w_prime, dtype=float)
    if w_prime.shape != inst.weights.shape:
        raise InstanceError("weight vector length does not match the instance")
    worst, margin = None, math.inf
    for comp, d in competitor_rows(inst):
        m = float(d @ w_prime)
        if m < margin:
            worst, margin = comp, m
    return Verdict(margin >= inst.delta - tol, worst, margin)


# -- reference least-distance projections ------------------------------------------

def least_distance(A, lo, hi, anchors, n_vars: int, tol: float = 1e-10):
    """``min sum (x_i - a_i)^2`` over anchored ``i`` subject to ``lo <= A x <= hi``.

    Returns ``(objective, x)``; the objective is ``inf`` when infeasible.
    """
    A = sp.csr_matrix(A)
    idx = np.array([v for v, _ in anchors], dtype=int)
    val = np.array([a for _, a in anchors], dtype=float)
    pdiag = np.zeros(n_vars)
    pdiag[idx] = 2.0
    q = np.zeros(n_vars)
    q[idx] = -2.0 * val
    eq = np.isfinite(lo) & np.isfinite(hi) & (lo == hi)
    has_lo = np.isfinite(lo) & ~eq
    has_hi = np.isfinite(hi) & ~eq
    blocks = [A[eq], -A[has_lo], A[has_hi]]
    b = np.concatenate([lo[eq], -lo[has_lo], hi[has_hi]])
    G = sp.vstack(blocks).tocsc()
    cones = []
    if eq.any():
        cones.append(clarabel.ZeroConeT(int(eq.sum())))
    if has_lo.any() or has_hi.any():
        cones.append(clarabel.NonnegativeConeT(int(has_lo.sum() + has_hi.sum())))
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = settings.tol_gap_rel = tol
    settings.tol_feas = tol
    settings.tol_ktratio = 1e-8
    settings.max_iter = 500
    solver = clarabel.DefaultSolver(sp.diags(pdiag).tocsc(), q, G, b, cones, settings)
    res = solver.solve()
    status = str(res.status)
    if "Infeasible" in status:
        return math.inf, None
    if status not in ("Solved", "AlmostSolved"):
        raise RuntimeError(f"reference QP solver stopped with status {status}")
    x = np.asarray(res.x)
    return float(np.sum((x[idx] - val) ** 2)), x


def _definition_objective(inst: Instance) -> tuple[float, np.ndarray | None]:
    rows = competitor_rows(inst)
    if not rows:
        return 0.0, inst.weights.copy()
    D = np.unique(np.array([d for _, d in rows]), axis=0)
    zero = np.all(D == 0, axis=1)
    if zero.any():
        if inst.delta > 0:
            return math.inf, None
        D = D[~zero]
        if len(D) == 0:
            return 0.0, inst.weights.copy()
    n = inst.size
    obj, x = least_distance(D, np.full(len(D), inst.delta), np.full(len(D), np.inf),
                            list(enumerate(inst.weights)), n)
    return obj, x


def _cycles_objective(inst: Instance) -> tuple[float, np.ndarray | None]:
    from .solvers import formulation, orientation, oriented_weights

    form = formulation(inst, compact=False)
    w = oriented_weights(inst)
    A, lo, hi = form.system.matrix()
    anchors = [(v, w[e]) for e, v in enumerate(form.weight_vars) if v is not None]
    if A.shape[0] == 0:
        return 0.0, inst.weights.copy()
    obj, x = least_distance(A, lo, hi, anchors, form.system.n_vars)
    if x is None:
        return obj, None
    out = np.array([form.fixed[e] if v is None else x[v] for e, v in enumerate(form.weight_vars)])
    out = orientation(inst) * out[: inst.size]
    return float(np.sum((out - inst.weights) ** 2)), out


def oracle_objective(inst: Instance, method: str = "definition") -> float:
    """Reference optimum of the inverse problem, ``inf`` if no weights work.

    ``definition`` enumerates every competitor directly; ``cycles`` uses the
    cycle-per-row system of the kind's auxiliary graph (the kind's own row
    family for single matroids and path trees).
    """
    return oracle_solution(inst, method)[0]


def oracle_solution(inst: Instance, method: str = "definition"):
    if method == "definition":
        return _definition_objective(inst)
    if method == "cycles":
        return _cycles_objective(inst)
    raise ValueError(f"unknown method {method!r}")
