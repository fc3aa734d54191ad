# %% [markdown]
# # Contraction and fixed points
#
# `linear_contraction_rule(alpha)` is alpha-Lipschitz in the sup metric by
# construction, so every start should slide geometrically onto one fixed point.

# %%
import numpy as np

from aspp import StateConfiguration, build_graph, evolve, linear_contraction_rule, random_graph
from aspp.convergence import (
    calibrated_amplitude,
    estimate_contraction,
    fit_decay,
    fixed_point_uniqueness,
    predicted_steps,
)

alpha, tol = 0.76, 1e-6
rule = linear_contraction_rule(1, alpha, [1.0])
g = random_graph(10, 5, seed=0)

# %% [markdown]
# Sampling random pairs gives an estimate that approaches alpha from below.

# %%
for trials in (10, 100, 1000, 10_000):
    print(trials, estimate_contraction(rule, g, trials=trials, seed=1).estimated_c)

# %% [markdown]
# Ten random starts per graph, one fixed point: `1 / (1 - alpha)` everywhere.

# %%
amp = calibrated_amplitude(alpha, tol, 15, uniform=True)
for n in (1, 10, 50):
    graph = build_graph(1, []) if n == 1 else random_graph(n, n, seed=n)
    rep = fixed_point_uniqueness(rule, graph, amplitude=amp, tol=tol, seed=n, center=1 / (1 - alpha))
    print(f"n={n:2d} unique={rep.unique} spread={rep.max_pairwise_distance:.1e} mean steps={rep.mean_steps}")

# %% [markdown]
# On an isolated node the approach is exactly geometric; on a graph the
# neighbor averaging only speeds it up.

# %%
star = StateConfiguration(np.full((10, 1), 1 / (1 - alpha)))
start = StateConfiguration(star.values + np.random.default_rng(0).uniform(-1, 1, (10, 1)))
fit = fit_decay(evolve(start, g, rule, 60), star)
print(f"graph decay rate {fit.rate:.4f}")

iso = build_graph(1, [])
fit = fit_decay(evolve(StateConfiguration([[0.0]]), iso, rule, 60), StateConfiguration([[1 / (1 - alpha)]]))
print(f"isolated decay rate {fit.rate:.10f}")
print("steps predicted from h0=0:", predicted_steps(alpha, tol, 1 / (1 - alpha)))
