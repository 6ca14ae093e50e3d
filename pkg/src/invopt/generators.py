"""Random desk-scale instances for tests and demos.

Every generator takes a :class:`numpy.random.Generator` and returns a
validated :class:`~invopt.graphcore.Instance` sized for the brute-force
oracle.
"""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from . import oracle
from .graphcore import (BipartiteGraph, Digraph, Instance, MatroidSpec,
                        validate)
from .matroid import enumerate_bases, enumerate_common_bases


def _weights(rng, size, low=0.0, high=3.0):
    return np.round(rng.uniform(low, high, size), 3)


def _delta(rng, high=2.0):
    return float(np.round(rng.uniform(0.0, high), 3))


def random_digraph(rng, n: int, density: float, self_loops: bool = False) -> Digraph:
    arcs = [(u, v) for u in range(n) for v in range(n)
            if (u != v or self_loops) and rng.random() < density]
    return Digraph(n, tuple(arcs))


def _spanning_digraph(rng, n: int, density: float, root: int = 0) -> Digraph:
    """Random digraph in which every node is reachable from ``root``."""
    order = [root] + [int(v) for v in rng.permutation([v for v in range(n) if v != root])]
    arcs = {(order[int(rng.integers(0, i))], order[i]) for i in range(1, n)}
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < density:
                arcs.add((u, v))
    return Digraph(n, tuple(sorted(arcs)))


def random_matroid(rng) -> Instance:
    choice = rng.integers(0, 3)
    if choice == 0:
        n = int(rng.integers(3, 6))
        g = _spanning_digraph(rng, n, 0.25)
        spec = MatroidSpec("graphic", g.arc_count, graph=g)
    elif choice == 1:
        size = int(rng.integers(2, 8))
        spec = MatroidSpec("uniform", size, rank=int(rng.integers(1, size + 1)))
    else:
        size = int(rng.integers(3, 9))
        labels = rng.integers(0, 3, size)
        classes = tuple(tuple(int(e) for e in np.flatnonzero(labels == c)) for c in range(3))
        classes = tuple(c for c in classes if c)
        limits = tuple(int(rng.integers(1, len(c) + 1)) for c in classes)
        spec = MatroidSpec("partition", size, classes=classes, limits=limits)
    bases = enumerate_bases(spec.build())
    basis = bases[int(rng.integers(0, len(bases)))]
    return validate(Instance("matroid", _weights(rng, spec.size), frozenset(basis), _delta(rng),
                             matroids=(spec,), digraph=spec.graph))


def random_intersection(rng) -> Instance:
    while True:
        size = int(rng.integers(3, 9))
        specs = []
        for _ in range(2):
            if rng.random() < 0.5:
                labels = rng.integers(0, 3, size)
                classes = tuple(tuple(int(e) for e in np.flatnonzero(labels == c)) for c in range(3))
                classes = tuple(c for c in classes if c)
                specs.append(MatroidSpec("partition", size, classes=classes,
                                         limits=tuple(1 for _ in classes)))
            else:
                n = int(rng.integers(2, 5))
                edges = tuple((int(rng.integers(0, n)), int(rng.integers(0, n))) for _ in range(size))
                specs.append(MatroidSpec("graphic", size, graph=Digraph(n, edges)))
        common = enumerate_common_bases(*(s.build() for s in specs))
        if len(common) >= 1:
            break
    basis = common[int(rng.integers(0, len(common)))]
    return validate(Instance("matroid-intersection", _weights(rng, size), frozenset(basis),
                             _delta(rng), matroids=tuple(specs)))


def random_arborescence(rng, n: int | None = None) -> Instance:
    n = n or int(rng.integers(2, 6))
    g = _spanning_digraph(rng, n, 0.35)
    trees = list(oracle.arborescences(n, g.arcs, 0))
    tree = trees[int(rng.integers(0, len(trees)))]
    return validate(Instance("arborescence", _weights(rng, g.arc_count), tree, _delta(rng),
                             digraph=g, root=0))


def random_st_path(rng) -> Instance:
    n = int(rng.integers(2, 6))
    s, t = 0, n - 1
    while True:
        g = random_digraph(rng, n, 0.45)
        paths = list(oracle.simple_paths(n, g.arcs, s, t))
        if paths:
            break
    path = paths[int(rng.integers(0, len(paths)))]
    return validate(Instance("st-path", _weights(rng, g.arc_count), frozenset(path), _delta(rng),
                             digraph=g, source=s, sink=t, sense="min"))


def random_matching(rng) -> Instance:
    n = int(rng.integers(2, 5))
    perm = rng.permutation(n)
    edges = {(x, int(perm[x])) for x in range(n)}
    for x in range(n):
        for y in range(n):
            if rng.random() < 0.6:
                edges.add((x, y))
    edges = tuple(sorted(edges))
    matchings = list(oracle.perfect_matchings(n, n, edges))
    m = matchings[int(rng.integers(0, len(matchings)))]
    return validate(Instance("perfect-matching", _weights(rng, len(edges)), m, _delta(rng),
                             bipartite=BipartiteGraph(n, n, edges)))


def _max_flow_value(g: Digraph, caps, s, t) -> int:
    mat = np.zeros((g.node_count, g.node_count), dtype=np.int32)
    for (u, v), c in zip(g.arcs, caps):
        if u != v:
            mat[u, v] += int(c)
    return int(maximum_flow(csr_matrix(mat), s, t).flow_value)


def random_flow(rng, max_tries: int = 100) -> Instance:
    """A maximum integral flow with random integral capacities (at most 2)."""
    from .inv_flowpath import FlowInstance, flow_value

    for _ in range(max_tries):
        n = int(rng.integers(2, 6))
        g = random_digraph(rng, n, 0.4)
        if g.arc_count == 0 or g.arc_count > 11:
            continue
        caps = rng.integers(1, 3, g.arc_count).astype(float)
        s, t = 0, n - 1
        value = _max_flow_value(g, caps, s, t)
        flows = list(oracle.integral_flows(n, g.arcs, caps, s, t, value))
        f = flows[int(rng.integers(0, len(flows)))]
        assert abs(flow_value(FlowInstance(g, caps, f, s, t)) - value) < 1e-9
        return validate(Instance("min-cost-flow", _weights(rng, g.arc_count), frozenset(),
                                 _delta(rng), digraph=g, capacities=caps, flow=f,
                                 source=s, sink=t, sense="min"))
    raise RuntimeError("could not draw a flow instance")


def random_sp_tree(rng, n: int | None = None) -> Instance:
    n = n or int(rng.integers(2, 6))
    g = _spanning_digraph(rng, n, 0.3)
    trees = list(oracle.arborescences(n, g.arcs, 0))
    tree = trees[int(rng.integers(0, len(trees)))]
    return validate(Instance("sp-tree", _weights(rng, g.arc_count), tree, _delta(rng),
                             digraph=g, root=0, sense="min"))


GENERATORS = {
    "matroid": random_matroid,
    "matroid-intersection": random_intersection,
    "arborescence": random_arborescence,
    "st-path": random_st_path,
    "perfect-matching": random_matching,
    "min-cost-flow": random_flow,
    "sp-tree": random_sp_tree,
}


def random_instance(kind: str, rng) -> Instance:
    return GENERATORS[kind](rng)


def planted_tree_stream(rng, count: int, dim: int = 8, nodes: int = 5,
                        min_margin: float = 0.5, theta=None):
    """Spanning-tree examples on the complete graph, separable by a planted parameter.

    Features are standard normal; the truth is the best tree under
    ``features @ theta`` and is kept only if it beats the runner-up by at
    least ``min_margin``.  Both are found by listing every spanning tree.
    Returns ``(examples, theta, margin, radius)`` where ``margin`` is the
    smallest observed gap and ``radius`` the largest norm of a feature
    difference between the truth and another tree.
    """
    from .learn import FeaturizedExample

    g = Digraph(nodes, tuple((u, v) for u in range(nodes) for v in range(u + 1, nodes)))
    spec = MatroidSpec("graphic", g.arc_count, graph=g)
    bases = [sorted(b) for b in enumerate_bases(spec.build())]
    theta = rng.normal(size=dim) if theta is None else np.asarray(theta, dtype=float)
    examples, margin, radius = [], np.inf, 0.0
    while len(examples) < count:
        f = rng.normal(size=(g.arc_count, dim))
        phis = np.array([f[b].sum(axis=0) for b in bases])
        scores = phis @ theta
        order = np.argsort(-scores, kind="stable")
        gap = scores[order[0]] - scores[order[1]]
        if gap < min_margin:
            continue
        truth = frozenset(bases[order[0]])
        inst = validate(Instance("matroid", np.zeros(g.arc_count), truth, 0.0,
                                 digraph=g, matroids=(spec,)))
        examples.append(FeaturizedExample(inst, f))
        margin = min(margin, float(gap))
        radius = max(radius, float(np.linalg.norm(phis - phis[order[0]], axis=1).max()))
    return examples, theta, margin, radius
