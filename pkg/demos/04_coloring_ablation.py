# %% [markdown]
# # 3-coloring ablation
#
# Planted 3-colorable graphs, a softmax-pressure rule, and six configurations
# that drop one feature at a time. The point is the harness, not the scores.

# %%
from aspp.coloring import ablation_csv, evaluate_instance, generate_3colorable, run_ablation
from aspp.rules import ColoringRuleConfig

inst = generate_3colorable(30, 2.0, seed=0)
print("edges:", inst.graph.edge_count // 2)
res = evaluate_instance(inst, ColoringRuleConfig())
print(f"proper={res.proper} violations={res.violation_rate:.3f} steps={res.steps}")

# %%
rows = run_ablation(instances=200, n=30, factor=2.0, seed=0)
print(ablation_csv(rows))
