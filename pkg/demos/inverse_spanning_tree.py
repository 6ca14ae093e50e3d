# %% [markdown]
# # Making a spanning tree win by a margin
#
# A triangle with edges a=(0,1), b=(1,2), c=(0,2) and weights (3, 2, 1).
# The tree {a, b} is already the heaviest, but only by 1 over {a, c}.
# We ask for the closest weights (in squared distance) under which it wins
# every comparison by 2.

# %%
import numpy as np

from invopt.graphcore import instance_from_dict
from invopt.oracle import oracle_objective, verify_delta_optimal
from invopt.solvers import formulation, solve_instance

inst = instance_from_dict({
    "kind": "matroid",
    "digraph": {"nodes": 3, "arcs": [[0, 1], [1, 2], [0, 2]]},
    "weights": [3, 2, 1],
    "designated": [0, 1],
    "delta": 2,
})
print("before:", verify_delta_optimal(inst, inst.weights))

# %% [markdown]
# The constraints are one row per (tree edge, non-tree edge) exchange.

# %%
form = formulation(inst)
print(form.system.dump())

sol = solve_instance(inst)
print("status", sol.status, "weights", np.round(sol.weights, 9), "objective", round(sol.objective, 9))
print("after: ", verify_delta_optimal(inst, sol.weights))

# %% [markdown]
# The brute-force reference lists all three spanning trees and solves the
# same projection with an interior-point method.

# %%
print("reference objective", round(oracle_objective(inst), 9))

# %% [markdown]
# The same weights seen as a common basis of two matroids: an arborescence
# on 3 nodes, solved through the exchange graph and its cycle bound.

# %%
arb = instance_from_dict({
    "kind": "arborescence",
    "digraph": {"nodes": 3, "arcs": [[0, 1], [0, 2], [1, 2]]},
    "root": 0, "weights": [1, 3, 1], "designated": [0, 2], "delta": 1,
})
form = formulation(arb)
ex = form.system.meta["exchange_graph"]
print("exchange arcs", ex.arcs)
sol = solve_instance(arb)
print("weights", np.round(sol.weights, 9), "objective", round(sol.objective, 9),
      "reference", round(oracle_objective(arb), 9))
