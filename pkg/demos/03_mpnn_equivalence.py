# %% [markdown]
# # One engine step equals one message-passing layer
#
# The MPNN rule sums messages in ascending source order, which is exactly what
# the loop-based reference does, so the two agree bit for bit.

# %%
import numpy as np

from aspp import StateConfiguration, diameter, random_graph
from aspp.mpnn import check_equivalence, format_influence, influence_matrix
from aspp.rules import MpnnFunctions, mpnn_rule

worst = 0.0
for k in range(20):
    rng = np.random.default_rng(k)
    n = int(rng.integers(2, 13))
    g = random_graph(n, n // 2, seed=k)
    equal, dev = check_equivalence(g, MpnnFunctions.random(3, k), StateConfiguration(rng.uniform(-1, 1, (n, 3))),
                                   diameter(g))
    worst = max(worst, dev)
print("largest deviation over 20 graphs:", worst)

# %% [markdown]
# With a monotone sum rule, a nudge at any node reaches every other node in
# `diameter` steps and no sooner.

# %%
g = random_graph(7, 1, seed=3)
H0 = StateConfiguration(np.zeros((7, 1)))
rule = mpnn_rule(MpnnFunctions.summing(1))
for T in range(diameter(g) + 1):
    m = influence_matrix(rule, g, H0, T)
    print(f"T={T}  reached {int(m.matrix.sum())}/49")
print(format_influence(m))
