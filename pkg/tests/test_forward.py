import numpy as np
import pytest

from invopt.forward import NoStructureError, best_structure
from invopt.generators import random_arborescence, random_matching, random_matroid
from invopt.graphcore import instance_from_dict
from invopt.matroid import enumerate_bases
from invopt.oracle import arborescences, perfect_matchings


def _all_structures(inst):
    if inst.kind == "matroid":
        return enumerate_bases(inst.matroids[0].build())
    if inst.kind == "arborescence":
        g = inst.digraph
        return list(arborescences(g.node_count, g.arcs, inst.root))
    b = inst.bipartite
    return list(perfect_matchings(b.left_count, b.right_count, b.edges))


def _enumerated_best(inst, w):
    best = max(w[sorted(s)].sum() for s in _all_structures(inst))
    tol = 1e-9 * (1 + np.abs(w).sum())
    return min(sorted(s) for s in _all_structures(inst) if w[sorted(s)].sum() >= best - tol)


@pytest.mark.parametrize("gen", [random_matroid, random_arborescence, random_matching])
def test_argmax_and_tie_rule_match_enumeration(gen, rng):
    for _ in range(40):
        inst = gen(rng)
        # small integer weights make ties common
        w = rng.integers(-2, 3, inst.size).astype(float)
        assert sorted(best_structure(inst, w)) == _enumerated_best(inst, w)


def test_two_parallel_edges():
    inst = instance_from_dict({"kind": "matroid",
                               "digraph": {"nodes": 2, "arcs": [[0, 1], [0, 1]]},
                               "weights": [0, 0], "designated": [0], "delta": 0})
    assert best_structure(inst, [-1, 1]) == {1}
    assert best_structure(inst, [0, 0]) == {0}
    with pytest.raises(NoStructureError):
        best_structure(inst, [0, 0], forbidden=[0, 1])


def test_min_sense_arborescence():
    inst = instance_from_dict({"kind": "arborescence",
                               "digraph": {"nodes": 3, "arcs": [[0, 1], [0, 2], [1, 2]]},
                               "root": 0, "weights": [0, 0, 0], "designated": [0, 1],
                               "delta": 0, "sense": "min"})
    assert best_structure(inst, [1, 5, 1]) == {0, 2}
