import dataclasses

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from invopt.generators import random_flow, random_sp_tree
from invopt.graphcore import Digraph, Instance
from invopt.inv_flowpath import (FlowInstance, build_residual, flow_formulation,
                                 inverse_min_cost_flow, inverse_sp_tree, sp_tree_formulation)
from invopt.inv_matroid import StructureError, inverse_st_path
from invopt.oracle import (oracle_objective, simple_paths, tree_path, verify_delta_optimal)
from invopt.solvers import flow_instance, solve_instance

PAR3 = Digraph(2, ((0, 1), (0, 1), (0, 1)))


def _par3(flow):
    return FlowInstance(PAR3, np.ones(3), np.array(flow, dtype=float), 0, 1)


def test_residual_parallel_arcs():
    res = build_residual(_par3([1, 1, 0]))
    assert sorted(zip(res.edge, res.sign, res.arcs)) == [
        (0, -1.0, (1, 0)), (1, -1.0, (1, 0)), (2, 1.0, (0, 1))]


def test_residual_all_saturated():
    res = build_residual(_par3([1, 1, 1]))
    assert set(res.sign) == {-1.0}
    assert res.twins() == []


def test_conservation_violation():
    g = Digraph(3, ((0, 1), (1, 2)))
    with pytest.raises(StructureError, match="conservation"):
        build_residual(FlowInstance(g, np.ones(2), np.array([1.0, 0.0]), 0, 2))


def test_non_maximum_flow():
    fi = _par3([1, 0, 0])
    build_residual(fi)  # accepted, warns
    with pytest.raises(StructureError, match="not maximum"):
        build_residual(fi, require_maximum=True)


def _independent_residual(fi):
    out = []
    for e, ((u, v), c, f) in enumerate(zip(fi.digraph.arcs, fi.capacities, fi.flow)):
        if c - f > 0:
            out.append((e, 1.0, (u, v)))
        if f > 0:
            out.append((e, -1.0, (v, u)))
    return sorted(out)


def test_residual_rule_matches_reimplementation(rng):
    for _ in range(40):
        inst = random_flow(rng)
        fi = flow_instance(inst)
        res = build_residual(fi, require_maximum=True)
        assert sorted(zip(res.edge, res.sign, res.arcs)) == _independent_residual(fi)


def test_inverse_flow_example():
    sol = inverse_min_cost_flow(_par3([1, 1, 0]), [1, 3, 2], 0.0)
    np.testing.assert_allclose(sol.weights, [1, 2.5, 2.5], atol=1e-7)
    assert sol.objective == pytest.approx(0.5, abs=1e-7)


def test_inverse_flow_already_optimal():
    sol = inverse_min_cost_flow(_par3([1, 1, 0]), [1, 1, 5], 2.0)
    assert sol.objective == pytest.approx(0.0, abs=1e-10)


def test_random_flows_against_enumeration(rng):
    checked = 0
    for _ in range(30):
        inst = random_flow(rng)
        sol = solve_instance(inst)
        ref = oracle_objective(inst)
        if not np.isfinite(ref):
            assert sol.status == "infeasible"
            continue
        assert sol.objective == pytest.approx(ref, abs=1e-6)
        assert verify_delta_optimal(inst, sol.weights).ok
        checked += 1
    assert checked >= 20


def test_split_flow_with_margin_is_infeasible_on_both_routes():
    # two parallel arcs, capacity 2 each, flow split 1/1: shifting one unit
    # either way is a competitor, and the two shifts have opposite costs
    g = Digraph(2, ((0, 1), (0, 1)))
    caps, f = np.array([2.0, 2.0]), np.array([1.0, 1.0])
    inst = Instance("min-cost-flow", np.array([1.0, 1.0]), frozenset(), 0.5, digraph=g,
                    capacities=caps, flow=f, source=0, sink=1, sense="min")
    fi = FlowInstance(g, caps, f, 0, 1)
    assert build_residual(fi).twins() == [(0, 1), (2, 3)]
    assert inverse_min_cost_flow(fi, inst.weights, 0.5).status == "infeasible"
    assert oracle_objective(inst) == float("inf")
    # at zero margin the same flow is fine
    assert inverse_min_cost_flow(fi, inst.weights, 0.0).objective == pytest.approx(0, abs=1e-10)


def test_transition_graph_used_only_for_twins_with_margin():
    g = Digraph(2, ((0, 1), (0, 1)))
    fi = FlowInstance(g, np.array([2.0, 2.0]), np.array([1.0, 1.0]), 0, 1)
    plain = flow_formulation(fi, 0.0).system
    moved = flow_formulation(fi, 0.5).system
    assert len(plain.variables("distance")) == 2 * 2
    assert len(moved.variables("distance")) == 4 * 4


# -- shortest-path trees --------------------------------------------------------

CHAIN = Digraph(3, ((0, 1), (1, 2), (0, 2)))


def test_sp_tree_example():
    sol = inverse_sp_tree(CHAIN, [1, 1, 1.5], 0, {0, 1}, 1.0)
    np.testing.assert_allclose(sol.weights, [0.5, 0.5, 2.0], atol=1e-7)
    assert sol.objective == pytest.approx(0.75, abs=1e-7)


def test_sp_tree_without_alternatives():
    g = Digraph(3, ((0, 1), (1, 2)))
    sol = inverse_sp_tree(g, [2, 3], 0, {0, 1}, 4.0)
    assert sol.objective == pytest.approx(0.0, abs=1e-12)


def test_sp_tree_rejects_non_tree():
    with pytest.raises(StructureError):
        inverse_sp_tree(CHAIN, [1, 1, 1], 0, {0}, 0.0)
    with pytest.raises(ValueError):
        inverse_sp_tree(CHAIN, [1, -1, 1], 0, {0, 1}, 0.0)


def test_sp_tree_paths_by_enumeration(rng):
    for _ in range(15):
        inst = random_sp_tree(rng, n=5)
        g, tree = inst.digraph, inst.designated
        sol = inverse_sp_tree(g, inst.weights, 0, tree, 0.3)
        w = sol.weights
        for v in range(1, g.node_count):
            own = tuple(tree_path(g, tree, 0, v))
            for p in simple_paths(g.node_count, g.arcs, 0, v):
                if p != own:
                    assert w[list(own)].sum() <= w[list(p)].sum() - 0.3 + 1e-6


def test_sp_tree_rows_are_necessary(rng):
    """Hand-built weights making T optimal with margin satisfy the rows at the true distances."""
    for _ in range(20):
        inst = random_sp_tree(rng, n=5)
        g, tree, delta = inst.digraph, inst.designated, 0.4
        w = np.zeros(g.arc_count)
        for e in tree:
            w[e] = rng.uniform(0.5, 2)
        tree_dist = np.zeros(g.node_count)
        for v in range(g.node_count):
            tree_dist[v] = w[list(tree_path(g, tree, 0, v))].sum()
        for e, (a, b) in enumerate(g.arcs):
            if e not in tree:
                w[e] = max(tree_dist[b] - tree_dist[a] + delta, 0.0) + rng.uniform(0, 1)
        mat = np.full((g.node_count, g.node_count), np.inf)
        for (a, b), x in zip(g.arcs, w):
            mat[a, b] = min(mat[a, b], x)
        dense = np.where(np.isfinite(mat), mat, 0.0)
        dist = shortest_path(csr_matrix(dense), method="D", indices=0)
        form = sp_tree_formulation(g, tree, 0, delta)
        x = form.weight_point(w)
        for v, var in enumerate(form.system.variables("potential")):
            x[var] = dist[v]
        assert form.system.max_violation(x) <= 1e-9


def test_objective_monotone_in_delta(rng):
    grid = [0.0, 0.25, 0.5, 1.0, 1.5, 2.5]
    for gen in (random_sp_tree, random_flow):
        for _ in range(5):
            inst = gen(rng)
            objs = []
            for d in grid:
                inst_d = dataclasses.replace(inst, delta=d)
                sol = solve_instance(inst_d)
                objs.append(sol.objective if sol.ok else float("inf"))
            assert all(b >= a - 1e-7 for a, b in zip(objs, objs[1:]))


def test_st_path_and_sp_tree_agree_on_predicate(rng):
    """Both routes make the tree path to t beat every other s-t path by delta."""
    for _ in range(15):
        inst = random_sp_tree(rng, n=5)
        g, tree, delta = inst.digraph, inst.designated, 0.5
        t = int(rng.integers(1, g.node_count))
        path = list(tree_path(g, tree, 0, t))
        by_tree = inverse_sp_tree(g, inst.weights, 0, tree, delta).weights
        by_path = inverse_st_path(g, inst.weights, 0, t, path, delta).weights
        for w in (by_tree, by_path):
            for p in simple_paths(g.node_count, g.arcs, 0, t):
                if sorted(p) != sorted(path):
                    assert w[path].sum() <= w[list(p)].sum() - delta + 1e-6
