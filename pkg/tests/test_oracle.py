import math

import numpy as np
import pytest

from invopt.generators import GENERATORS
from invopt.graphcore import instance_from_dict
from invopt.matroid import UniformMatroid, enumerate_bases
from invopt.oracle import (OracleGuardError, arborescences, integral_flows, oracle_objective,
                           oracle_solution, perfect_matchings, simple_paths,
                           verify_delta_optimal, walks)
from invopt.solvers import solve_instance

TRIANGLE = {"kind": "matroid", "digraph": {"nodes": 3, "arcs": [[0, 1], [1, 2], [0, 2]]},
            "weights": [3, 2, 1], "designated": [0, 1], "delta": 2}


def test_triangle_after_inverse():
    inst = instance_from_dict(TRIANGLE)
    sol = solve_instance(inst)
    ok, _, margin = verify_delta_optimal(inst, sol.weights)
    assert ok
    assert 2 - 1e-6 <= margin <= 2 + 1e-6


def test_triangle_original_weights():
    inst = instance_from_dict(TRIANGLE)
    v = verify_delta_optimal(inst, inst.weights)
    assert not v.ok
    assert v.worst_competitor == frozenset({0, 2})
    assert v.margin == 1.0


def test_unique_solution_has_infinite_margin():
    inst = instance_from_dict({"kind": "arborescence",
                               "digraph": {"nodes": 3, "arcs": [[0, 1], [0, 2]]},
                               "root": 0, "weights": [1, 1], "designated": [0, 1], "delta": 5})
    ok, worst, margin = verify_delta_optimal(inst, inst.weights)
    assert ok and worst is None and margin == math.inf


def test_oracle_objective_examples():
    inst = instance_from_dict({"kind": "matroid", "uniform": {"rank": 1}, "weights": [1, 2],
                               "designated": [0], "delta": 1})
    assert oracle_objective(inst) == pytest.approx(2.0, abs=1e-7)
    assert oracle_objective(inst.with_delta(0.0).with_weights([2, 1])) == pytest.approx(0, abs=1e-9)


def test_oracle_guard():
    inst = instance_from_dict({"kind": "matroid", "uniform": {"rank": 2},
                               "weights": [0] * 13, "designated": [0, 1], "delta": 0})
    with pytest.raises(OracleGuardError):
        oracle_objective(inst)


def test_enumerators_small_cases():
    # 3-node arborescence fixture
    assert sorted(map(sorted, arborescences(3, [(0, 1), (0, 2), (1, 2)], 0))) == [[0, 1], [0, 2]]
    diamond = [(0, 1), (1, 3), (0, 2), (2, 3)]
    assert sorted(simple_paths(4, diamond, 0, 3)) == [(0, 1), (2, 3)]
    assert len(list(perfect_matchings(3, 3, [(x, y) for x in range(3) for y in range(3)]))) == 6
    flows = list(integral_flows(2, [(0, 1), (0, 1)], [2, 2], 0, 1, 2))
    assert sorted(tuple(f) for f in flows) == [(0, 2), (1, 1), (2, 0)]
    # walks of at most two arcs from node 0 on a 2-cycle
    assert sorted(walks(2, [(0, 1), (1, 0)], 0, 2)) == [(0,), (0, 1)]


def test_uniform_bases_count():
    assert len(enumerate_bases(UniformMatroid(6, 3))) == 20


@pytest.mark.parametrize("kind", sorted(GENERATORS))
def test_definition_and_cycles_agree(kind, rng):
    """Two independent reference objectives.

    For s-t paths the cycle route runs through the arborescence reduction,
    which can only be larger than the definition.
    """
    for _ in range(8):
        inst = GENERATORS[kind](rng)
        a = oracle_objective(inst, "definition")
        b = oracle_objective(inst, "cycles")
        if kind == "st-path":
            assert b >= a - 1e-7
        elif math.isinf(a):
            assert math.isinf(b)
        else:
            assert b == pytest.approx(a, abs=1e-6, rel=1e-6)


def test_definition_solution_is_delta_optimal(rng):
    for kind in sorted(GENERATORS):
        inst = GENERATORS[kind](rng)
        obj, w = oracle_solution(inst)
        if w is not None:
            assert verify_delta_optimal(inst, w, tol=1e-6).ok
            assert obj == pytest.approx(float(np.sum((w - inst.weights) ** 2)), abs=1e-9)
