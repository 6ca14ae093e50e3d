# %% [markdown]
# # Learning edge weights from observed spanning trees
#
# Each example is the complete graph on 5 nodes with random 8-dimensional
# edge features. The observed tree is the best one under a hidden parameter.
# The learner predicts, measures the Hamming loss, and projects its
# parameter onto the set where the observed tree wins by that loss.

# %%
import numpy as np

from invopt.generators import planted_tree_stream
from invopt.learn import hinge_bound, train_online

rng = np.random.default_rng(7)
examples, theta_star, margin, radius = planted_tree_stream(rng, 200, dim=8, min_margin=0.5)
model, records = train_online(examples, "hamming", passes=20, stop_when_clean=True)

# %%
for r in records:
    if r.loss > 0:
        print(f"round {r.round:4d}  loss {r.loss:g}  hinge {r.hinge:7.3f}  step {r.update_objective:.3g}")

passes = records[-1].replay + 1
H = sum(r.hinge for r in records)
A = max(r.loss for r in records)
print(f"{passes} passes, {sum(r.loss > 0 for r in records)} updates")
print(f"cumulative hinge {H:.2f}, bound {hinge_bound(A, radius, np.linalg.norm(theta_star), margin):.3g}")

# %% [markdown]
# Only the direction of the parameter matters for prediction.

# %%
cos = model.theta @ theta_star / np.linalg.norm(model.theta) / np.linalg.norm(theta_star)
print(f"cosine to the hidden parameter {cos:.3f}")
