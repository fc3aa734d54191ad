# %% [markdown]
# # Life on the graph engine
#
# A Life board is just a grid graph with the B3/S23 rule as the local update.
# We run a glider, then feed gliders into the two shipped logic circuits.

# %%
import numpy as np

from aspp.life import GridPattern, load_asset, run_life, frame, validate_pattern

glider, spec = load_asset("glider")
print(glider)

# %% [markdown]
# Four steps later the glider has moved one cell down and one to the right.

# %%
arena = (8, 8)
trace = run_life(glider, 4, arena, offset=(1, 1))
for t in (0, 4):
    print(f"t={t}")
    print(GridPattern.from_array(frame(trace.states[t], arena)))
print(validate_pattern(glider, spec).to_json())

# %% [markdown]
# ## Gun and gates
#
# The gun emits one glider every 30 generations into a probe window. The AND
# circuit leaves a block in its probe only when both input gliders arrive.

# %%
gun = validate_pattern(*load_asset("gosper-gun"))
print("gun:", gun.details)

for stem in ("and-gate", "or-gate"):
    rep = validate_pattern(*load_asset(stem))
    table = "  ".join(f"{r['inputs']}->{r['observed']}" for r in rep.rows)
    print(f"{stem:8s} accuracy={rep.accuracy:.2f}  {table}")

# %%
pattern, spec = load_asset("and-gate")
both = spec.inputs[0].cells() | spec.inputs[1].cells()
arena, offset = (pattern.height + 40, pattern.width + 40), (20, 20)
final = frame(run_life(pattern, spec.read_time, arena, offset, extra_cells=both, capture="endpoints").final, arena)
r, c = np.nonzero(final)
print(f"live cells after t={spec.read_time}: {len(r)}, rows {r.min()}..{r.max()}, cols {c.min()}..{c.max()}")
