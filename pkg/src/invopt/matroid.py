"""Matroid independence oracles and desk-scale enumeration helpers."""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

ENUMERATION_LIMIT = 20


class MatroidError(ValueError):
    pass


class Matroid:
    """Independence oracle over the ground set ``0..ground_size-1``."""

    ground_size: int

    def is_independent(self, subset: Iterable[int]) -> bool:
        raise NotImplementedError

    def rank(self, subset: Iterable[int] | None = None) -> int:
        """Rank by greedy augmentation (valid for any matroid)."""
        pool = range(self.ground_size) if subset is None else sorted(set(subset))
        chosen: list[int] = []
        for e in pool:
            if self.is_independent(chosen + [e]):
                chosen.append(e)
        return len(chosen)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


class GraphicMatroid(Matroid):
    """Edge sets of an undirected multigraph; independent iff acyclic.

    Arc directions are ignored, parallel edges and self-loops are allowed
    (a self-loop is a loop of the matroid).
    """

    def __init__(self, node_count: int, edges: Sequence[tuple[int, int]]):
        self.node_count = node_count
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        self.ground_size = len(self.edges)

    def is_independent(self, subset: Iterable[int]) -> bool:
        ds = _DisjointSet(self.node_count)
        for e in subset:
            u, v = self.edges[e]
            if not ds.union(u, v):
                return False
        return True

    def tree_path(self, forest: Iterable[int], u: int, v: int) -> list[int] | None:
        """Edge ids on the forest path between ``u`` and ``v`` (None if disconnected)."""
        adj: dict[int, list[tuple[int, int]]] = {}
        for e in forest:
            a, b = self.edges[e]
            adj.setdefault(a, []).append((b, e))
            adj.setdefault(b, []).append((a, e))
        prev: dict[int, tuple[int, int] | None] = {u: None}
        stack = [u]
        while stack:
            x = stack.pop()
            if x == v:
                break
            for y, e in adj.get(x, ()):
                if y not in prev:
                    prev[y] = (x, e)
                    stack.append(y)
        if v not in prev:
            return None
        path = []
        x = v
        while prev[x] is not None:
            x, e = prev[x]
            path.append(e)
        return sorted(path)


class PartitionMatroid(Matroid):
    """At most ``limits[i]`` elements from ``classes[i]``; other elements are free."""

    def __init__(self, ground_size: int, classes: Sequence[Sequence[int]], limits: Sequence[int]):
        if len(classes) != len(limits):
            raise MatroidError("one limit per class is required")
        self.ground_size = ground_size
        self.classes = tuple(tuple(c) for c in classes)
        self.limits = tuple(int(k) for k in limits)
        self.class_of = {}
        for i, c in enumerate(self.classes):
            for e in c:
                if e in self.class_of:
                    raise MatroidError("partition classes must be disjoint")
                self.class_of[e] = i

    def is_independent(self, subset: Iterable[int]) -> bool:
        used = [0] * len(self.classes)
        for e in subset:
            i = self.class_of.get(e)
            if i is None:
                continue
            used[i] += 1
            if used[i] > self.limits[i]:
                return False
        return True


class UniformMatroid(Matroid):
    def __init__(self, ground_size: int, rank: int):
        self.ground_size = ground_size
        self.k = int(rank)

    def is_independent(self, subset: Iterable[int]) -> bool:
        return len(set(subset)) <= self.k


def arborescence_matroids(node_count: int, arcs: Sequence[tuple[int, int]], root: int):
    """Graphic and partition matroid whose common bases are the r-arborescences.

    Every non-root node may take one incoming arc; arcs entering the root get
    a class of capacity zero so they never appear in a common basis.
    """
    graphic = GraphicMatroid(node_count, arcs)
    incoming: list[list[int]] = [[] for _ in range(node_count)]
    for a, (_, h) in enumerate(arcs):
        incoming[h].append(a)
    classes = [incoming[v] for v in range(node_count) if incoming[v]]
    limits = [0 if v == root else 1 for v in range(node_count) if incoming[v]]
    return graphic, PartitionMatroid(len(arcs), classes, limits)


def is_basis(m: Matroid, basis: Iterable[int]) -> bool:
    b = set(basis)
    if not m.is_independent(b):
        return False
    return all(not m.is_independent(b | {e}) for e in range(m.ground_size) if e not in b)


def circuit(m: Matroid, basis: Iterable[int], f: int) -> frozenset[int]:
    """The unique circuit in ``basis + f``.

    ``e`` belongs to it exactly when swapping ``e`` out for ``f`` keeps
    independence, which costs one oracle query per basis element.
    """
    b = set(basis)
    if f in b:
        raise MatroidError(f"element {f} already belongs to the basis")
    if m.is_independent(b | {f}):
        raise MatroidError("basis + f is independent, so the given set is not a basis")
    return frozenset({f} | {e for e in b if m.is_independent((b - {e}) | {f})})


def graphic_circuit(m: GraphicMatroid, basis: Iterable[int], f: int) -> frozenset[int]:
    """Fast path for graphic matroids: the tree path between the ends of ``f``."""
    b = set(basis)
    if f in b:
        raise MatroidError(f"element {f} already belongs to the basis")
    u, v = m.edges[f]
    if u == v:
        return frozenset({f})
    path = m.tree_path(b, u, v)
    if path is None:
        raise MatroidError("basis + f is independent, so the given set is not a basis")
    return frozenset(path) | {f}


def fundamental_circuit(m: Matroid, basis: Iterable[int], f: int) -> frozenset[int]:
    if isinstance(m, GraphicMatroid):
        return graphic_circuit(m, basis, f)
    return circuit(m, basis, f)


def _guard(m: Matroid):
    if m.ground_size > ENUMERATION_LIMIT:
        raise MatroidError(
            f"enumeration is limited to {ENUMERATION_LIMIT} elements (got {m.ground_size})")


def enumerate_bases(m: Matroid) -> list[frozenset[int]]:
    """All bases in lexicographic order of their sorted element ids."""
    _guard(m)
    r = m.rank()
    return [frozenset(c) for c in itertools.combinations(range(m.ground_size), r)
            if m.is_independent(c)]


def enumerate_common_bases(m1: Matroid, m2: Matroid) -> list[frozenset[int]]:
    if m1.ground_size != m2.ground_size:
        raise MatroidError("matroids must share a ground set")
    _guard(m1)
    r1, r2 = m1.rank(), m2.rank()
    if r1 != r2:
        return []
    return [frozenset(c) for c in itertools.combinations(range(m1.ground_size), r1)
            if m1.is_independent(c) and m2.is_independent(c)]
