import itertools

import pytest
from hypothesis import given, settings, strategies as st

from invopt.matroid import (GraphicMatroid, MatroidError, PartitionMatroid, UniformMatroid,
                            arborescence_matroids, circuit, enumerate_bases,
                            enumerate_common_bases, fundamental_circuit, graphic_circuit,
                            is_basis)

TRIANGLE = GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)])  # a, b, c


def test_is_basis_examples():
    assert is_basis(TRIANGLE, {0, 1})
    assert not is_basis(TRIANGLE, {0})
    assert is_basis(UniformMatroid(2, 1), {0})


def test_circuit_examples():
    assert circuit(TRIANGLE, {0, 1}, 2) == {0, 1, 2}
    assert circuit(UniformMatroid(2, 1), {0}, 1) == {0, 1}
    # path a-b on nodes 0-1-2, pendant c = 2-3, d parallel to c
    m = GraphicMatroid(4, [(0, 1), (1, 2), (2, 3), (2, 3)])
    assert circuit(m, {0, 1, 2}, 3) == {2, 3}
    assert graphic_circuit(m, {0, 1, 2}, 3) == {2, 3}


def test_circuit_rejects_non_basis():
    with pytest.raises(MatroidError):
        circuit(TRIANGLE, {0}, 1)
    with pytest.raises(MatroidError):
        circuit(TRIANGLE, {0, 1}, 1)


def test_enumerate_bases_examples():
    assert enumerate_bases(TRIANGLE) == [{0, 1}, {0, 2}, {1, 2}]
    assert enumerate_bases(UniformMatroid(2, 1)) == [{0}, {1}]
    k4 = GraphicMatroid(4, list(itertools.combinations(range(4), 2)))
    assert len(enumerate_bases(k4)) == 16


def test_enumerate_common_bases_examples():
    # r=0, a=1, b=2; arcs ra, rb, ab
    g, p = arborescence_matroids(3, [(0, 1), (0, 2), (1, 2)], 0)
    assert enumerate_common_bases(g, p) == [{0, 1}, {0, 2}]
    assert enumerate_common_bases(TRIANGLE, TRIANGLE) == enumerate_bases(TRIANGLE)
    assert enumerate_common_bases(UniformMatroid(3, 1), UniformMatroid(3, 2)) == []


def test_enumeration_guard():
    with pytest.raises(MatroidError, match="limited"):
        enumerate_bases(UniformMatroid(21, 2))


def test_root_arcs_never_independent():
    _, p = arborescence_matroids(2, [(0, 1), (1, 0)], 0)
    assert p.is_independent({0})
    assert not p.is_independent({1})


# -- exhaustive property checks on random small matroids ----------------------

@st.composite
def matroids(draw):
    kind = draw(st.sampled_from(["graphic", "partition", "uniform"]))
    if kind == "graphic":
        n = draw(st.integers(1, 5))
        edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                              min_size=1, max_size=8))
        return GraphicMatroid(n, edges)
    size = draw(st.integers(1, 8))
    if kind == "uniform":
        return UniformMatroid(size, draw(st.integers(0, size)))
    labels = draw(st.lists(st.integers(-1, 2), min_size=size, max_size=size))
    classes = [[e for e in range(size) if labels[e] == c] for c in range(3)]
    classes = [c for c in classes if c]
    limits = [draw(st.integers(0, len(c))) for c in classes]
    return PartitionMatroid(size, classes, limits)


def _subsets(n):
    for r in range(n + 1):
        yield from (frozenset(c) for c in itertools.combinations(range(n), r))


@settings(max_examples=60, deadline=None)
@given(matroids())
def test_matroid_axioms(m):
    indep = {s for s in _subsets(m.ground_size) if m.is_independent(s)}
    assert frozenset() in indep
    for s in indep:
        assert all(s - {e} in indep for e in s)  # hereditary
    for a in indep:
        for b in indep:
            if len(a) < len(b):
                assert any(a | {e} in indep for e in b - a)  # exchange


@settings(max_examples=60, deadline=None)
@given(matroids())
def test_circuits_are_minimal_and_exchangeable(m):
    bases = enumerate_bases(m)
    assert len({len(b) for b in bases}) == 1
    for b in bases[:4]:
        for f in range(m.ground_size):
            if f in b:
                continue
            c = circuit(m, b, f)
            assert not m.is_independent(c)
            assert all(m.is_independent(c - {e}) for e in c)
            for e in c - {f}:
                assert is_basis(m, (b - {e}) | {f})
            assert fundamental_circuit(m, b, f) == c
