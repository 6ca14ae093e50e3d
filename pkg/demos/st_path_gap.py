# %% [markdown]
# # Where the s-t path reduction is not exact
#
# The path solver turns a shortest s-t path into a minimum arborescence by
# adding zero-cost arcs from t to every node. The designated tree hangs the
# nodes off the path from t. Any other parent of such a node then becomes a
# competing tree. That competitor has no counterpart among s-t paths, so the
# reduction can demand more than the path problem needs.

# %%
import numpy as np

from invopt.generators import random_st_path
from invopt.graphcore import instance_from_dict
from invopt.oracle import oracle_objective, verify_delta_optimal
from invopt.solvers import solve_instance

# s=0, t=1, path is the single arc 0->1; arc 0->2 leads nowhere near t
inst = instance_from_dict({
    "kind": "st-path",
    "digraph": {"nodes": 3, "arcs": [[0, 1], [0, 2]]},
    "source": 0, "sink": 1, "weights": [0, 0], "designated": [0], "delta": 1,
})
sol = solve_instance(inst)
print("original weights already optimal:", verify_delta_optimal(inst, inst.weights).ok)
print("reduction objective", round(sol.objective, 9), "weights", np.round(sol.weights, 9))
print("enumeration objective", oracle_objective(inst))

# %% [markdown]
# On random instances the reduction's answer is always feasible for the path
# problem, but often not the closest one.

# %%
rng = np.random.default_rng(1)
gaps, feasible = [], 0
for _ in range(100):
    inst = random_st_path(rng)
    sol = solve_instance(inst)
    feasible += verify_delta_optimal(inst, sol.weights).ok
    gaps.append(sol.objective - oracle_objective(inst))
gaps = np.array(gaps)
print(f"feasible {feasible}/100, above the reference on {np.sum(gaps > 1e-6)}/100, "
      f"largest gap {gaps.max():.3f}, smallest {gaps.min():.1e}")
