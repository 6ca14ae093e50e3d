import itertools

import numpy as np
import pytest

from invopt.cyclebound import shortest_walk_distances, simple_cycles
from invopt.generators import random_arborescence, random_intersection, random_matroid
from invopt.graphcore import Digraph, instance_from_dict
from invopt.inv_matroid import (StructureError, arborescence_formulation, exchange_graph,
                                formulation_size, intersection_formulation, inverse_arborescence,
                                inverse_matroid, inverse_matroid_intersection, inverse_st_path,
                                path_arcs_in_order, st_path_reduction)
from invopt.matroid import (GraphicMatroid, UniformMatroid, arborescence_matroids,
                            enumerate_common_bases, is_basis)
from invopt.oracle import oracle_objective, verify_delta_optimal
from invopt.selftest import halfspace_projection
from invopt.solvers import solve_instance

TRIANGLE = GraphicMatroid(3, [(0, 1), (1, 2), (0, 2)])
R1 = UniformMatroid(2, 1)
# r=0, a=1, b=2 with arcs ra, rb, ab
ARB = Digraph(3, ((0, 1), (0, 2), (1, 2)))


def test_rank_one_matroid():
    sol = inverse_matroid(R1, [1, 2], {0}, 1.0)
    np.testing.assert_allclose(sol.weights, [2, 1], atol=1e-7)
    assert sol.objective == pytest.approx(2.0, abs=1e-7)


def test_triangle_matroid():
    sol = inverse_matroid(TRIANGLE, [3, 2, 1], {0, 1}, 0.0)
    np.testing.assert_allclose(sol.weights, [3, 2, 1], atol=1e-9)
    assert sol.objective == pytest.approx(0.0, abs=1e-12)
    sol = inverse_matroid(TRIANGLE, [3, 2, 1], {0, 1}, 2.0)
    np.testing.assert_allclose(sol.weights, [3, 2.5, 0.5], atol=1e-7)
    assert sol.objective == pytest.approx(0.5, abs=1e-7)
    # the other row a - c >= 2 stays slack
    assert sol.weights[0] - sol.weights[2] > 2.0 + 1e-3


def test_non_basis_rejected():
    with pytest.raises(StructureError):
        inverse_matroid(TRIANGLE, [1, 1, 1], {0}, 0.0)


def test_exchange_graph_examples():
    g = exchange_graph(R1, R1, {0})
    assert g.a1 == ((0, 1),) and g.a2 == ((1, 0),)
    (cyc,) = simple_cycles(g.size, g.arcs)
    assert sum(g.numeric_lengths([5.0, 3.0])[a] for a in cyc) == 2.0
    assert exchange_graph(UniformMatroid(2, 2), UniformMatroid(2, 2), {0, 1}).arcs == []


def _brute_exchange(m1, m2, basis):
    a1, a2 = set(), set()
    for x, y in itertools.product(sorted(basis), range(m1.ground_size)):
        if y in basis:
            continue
        swapped = (set(basis) - {x}) | {y}
        if is_basis(m1, swapped):
            a1.add((x, y))
        if is_basis(m2, swapped):
            a2.add((y, x))
    return a1, a2


def test_exchange_graph_matches_definition(rng):
    m1, m2 = arborescence_matroids(3, ARB.arcs, 0)
    g = exchange_graph(m1, m2, {0, 2})
    assert (set(g.a1), set(g.a2)) == _brute_exchange(m1, m2, {0, 2})
    for _ in range(25):
        inst = random_intersection(rng)
        m1, m2 = (s.build() for s in inst.matroids)
        g = exchange_graph(m1, m2, inst.designated)
        assert (set(g.a1), set(g.a2)) == _brute_exchange(m1, m2, inst.designated)


def test_intersection_rank_one():
    sol = inverse_matroid_intersection(R1, R1, [1, 2], {0}, 1.0)
    np.testing.assert_allclose(sol.weights, [2, 1], atol=1e-7)


def test_arborescence_fixture_against_oracles():
    m1, m2 = arborescence_matroids(3, ARB.arcs, 0)
    w = np.array([1.0, 3.0, 1.0])
    sol = inverse_matroid_intersection(m1, m2, w, {0, 2}, 0.0)
    form = intersection_formulation(m1, m2, {0, 2}, 0.0, compact=False)
    assert sol.objective == pytest.approx(form.solve(w).objective, abs=1e-6)
    wp = sol.weights
    for other in enumerate_common_bases(m1, m2):
        assert wp[[0, 2]].sum() >= wp[sorted(other)].sum() - 1e-7
    assert {0, 1} in enumerate_common_bases(m1, m2)


def test_already_optimal_is_unchanged(rng):
    for _ in range(20):
        inst = random_intersection(rng)
        m1, m2 = (s.build() for s in inst.matroids)
        # make the designated basis win by a wide margin
        w = np.where(np.isin(np.arange(inst.size), sorted(inst.designated)), 10.0, 0.0)
        sol = inverse_matroid_intersection(m1, m2, w, inst.designated, 0.0)
        assert sol.objective == pytest.approx(0.0, abs=1e-10)


def test_large_weight_shift_is_feasible(rng):
    """w + M 1_B is delta-optimal for M large, so the optimum never exceeds M^2 |B|."""
    for _ in range(20):
        inst = random_arborescence(rng)
        big = 2 * np.abs(inst.weights).sum() + 2 * inst.delta + 1
        w_shift = inst.weights + big * np.isin(np.arange(inst.size), sorted(inst.designated))
        assert verify_delta_optimal(inst, w_shift).ok
        sol = solve_instance(inst)
        assert sol.ok
        assert sol.objective <= big ** 2 * len(inst.designated) + 1e-6


def _complete_point(form, w, delta):
    """Fill lengths and distances of a compact exchange-graph system for weights ``w``."""
    x = form.weight_point(w)
    ex = form.system.meta["exchange_graph"]
    (cb,) = form.system.meta["cyclebound"]
    lengths = ex.numeric_lengths(w)
    x[cb["l"]] = lengths
    D = shortest_walk_distances(ex.size, ex.arcs, lengths)
    pot = np.minimum(0.0, D.min(axis=0)) if ex.size else D
    big = 1.0 + delta + np.abs(lengths).sum()
    for a in range(ex.size):
        for b in range(ex.size):
            x[cb["d"][a][b]] = D[a, b] if np.isfinite(D[a, b]) else big + pot[b]
    return x


def test_feasibility_witness_on_constraint_system(rng):
    for _ in range(20):
        inst = random_arborescence(rng)
        form = arborescence_formulation(inst.digraph, inst.designated, inst.root, inst.delta)
        big = inst.delta + np.abs(inst.weights).sum() + 1
        w_shift = inst.weights + big * np.isin(np.arange(inst.size), sorted(inst.designated))
        assert form.system.max_violation(_complete_point(form, w_shift, inst.delta)) <= 1e-9


def test_local_minimality(rng):
    """No small feasible step from the solution lowers the objective."""
    for gen in (random_matroid, random_arborescence, random_intersection):
        inst = gen(rng)
        sol = solve_instance(inst)
        for _ in range(50):
            u = rng.normal(size=inst.size)
            cand = sol.weights + 1e-3 * u / np.linalg.norm(u)
            if verify_delta_optimal(inst, cand, tol=0.0).ok:
                assert np.sum((cand - inst.weights) ** 2) >= sol.objective - 1e-9


def test_wrapper_matches_general_route(rng):
    for _ in range(10):
        inst = random_arborescence(rng)
        a = inverse_arborescence(inst.digraph, inst.weights, inst.designated, inst.root,
                                 inst.delta)
        m1, m2 = arborescence_matroids(inst.digraph.node_count, inst.digraph.arcs, inst.root)
        b = inverse_matroid_intersection(m1, m2, inst.weights, inst.designated, inst.delta)
        assert a.weights.tobytes() == b.weights.tobytes()


def test_min_sense_is_negated_max():
    w = np.array([3.0, 1.0, 3.0])
    lo = inverse_arborescence(ARB, w, {0, 2}, 0, 1.0, sense="min")
    hi = inverse_arborescence(ARB, -w, {0, 2}, 0, 1.0, sense="max")
    np.testing.assert_allclose(lo.weights, -hi.weights, atol=1e-12)
    assert lo.objective == pytest.approx(hi.objective, abs=1e-12)
    # under min sense the designated tree must be cheaper by the margin
    assert lo.weights[[0, 1]].sum() - lo.weights[[0, 2]].sum() >= 1.0 - 1e-7


def test_star_digraph_has_no_competitor():
    star = Digraph(4, ((0, 1), (0, 2), (0, 3)))
    for delta in (0.0, 5.0):
        sol = inverse_arborescence(star, [1, -2, 0.5], {0, 1, 2}, 0, delta)
        assert sol.objective == 0.0


def test_bad_arborescence_rejected():
    with pytest.raises(StructureError, match="two incoming"):
        arborescence_formulation(ARB, {1, 2}, 0, 0.0)
    with pytest.raises(StructureError, match="reach"):
        arborescence_formulation(ARB, {0}, 0, 0.0)


def test_st_path_examples():
    par = Digraph(2, ((0, 1), (0, 1)))
    sol = inverse_st_path(par, [1, 2], 0, 1, [0], 2.0)
    np.testing.assert_allclose(sol.weights, [0.5, 2.5], atol=1e-7)
    assert sol.objective == pytest.approx(0.5, abs=1e-7)

    line = Digraph(3, ((0, 1), (1, 2)))
    assert inverse_st_path(line, [1, 4], 0, 2, [0, 1], 3.0).objective == pytest.approx(0, abs=1e-12)

    diamond = Digraph(4, ((0, 1), (1, 3), (0, 2), (2, 3)))
    sol = inverse_st_path(diamond, [1, 1, 1, 1], 0, 3, [0, 1], 1.0)
    expected = halfspace_projection([1, 1, 1, 1], [-1, -1, 1, 1], 1)
    np.testing.assert_allclose(sol.weights, expected, atol=1e-7)
    assert sol.objective == pytest.approx(0.25, abs=1e-7)
    w = sol.weights
    assert (w[2] + w[3]) - (w[0] + w[1]) >= 1 - 1e-7


def test_st_path_reduction_shape():
    g = Digraph(4, ((0, 1), (1, 3), (0, 2)))
    aug, designated, fixed = st_path_reduction(g, 0, 3, [1, 0])
    assert aug.arcs[3:] == ((3, 0), (3, 1), (3, 2))
    assert designated == {0, 1, 5}  # node 2 hangs off t
    assert fixed == {3: 0.0, 4: 0.0, 5: 0.0}
    with pytest.raises(StructureError):
        path_arcs_in_order(g, [0], 0, 3)


def test_st_path_rejects_negative_weights():
    with pytest.raises(ValueError):
        inverse_st_path(Digraph(2, ((0, 1),)), [-1], 0, 1, [0], 0.0)


def test_st_path_solution_is_feasible_but_may_overshoot():
    # arc s->v with v off the path: the reduction forces w'(sv) >= delta
    g = Digraph(3, ((0, 1), (0, 2)))
    sol = inverse_st_path(g, [0.0, 0.0], 0, 1, [0], 1.0)
    assert sol.objective == pytest.approx(1.0, abs=1e-7)
    inst = instance_from_dict({"kind": "st-path", "digraph": {"nodes": 3,
                                                              "arcs": [[0, 1], [0, 2]]},
                               "source": 0, "sink": 1, "weights": [0, 0],
                               "designated": [0], "delta": 1})
    assert verify_delta_optimal(inst, sol.weights).ok
    assert oracle_objective(inst) == pytest.approx(0.0, abs=1e-9)


def test_formulation_size_counts():
    size = formulation_size(ARB, {0, 2}, 0)
    m, ex = size["exchange_nodes"], size["exchange_arcs"]
    assert size["variables"] == m + ex + m * m
    assert size["rows"] == 2 * ex + m * ex + m


def test_random_matroids_match_oracle(rng):
    for _ in range(15):
        inst = random_matroid(rng)
        sol = solve_instance(inst)
        assert sol.objective == pytest.approx(oracle_objective(inst), abs=1e-6)
