# %% [markdown]
# # Distillation toy
#
# Teacher embeddings are projected to 4 dimensions and used as both start and
# target. The identity update is a global optimum, so descent from a damped
# start mostly learns to undo its own damping.

# %%
import numpy as np

from aspp.distill import distill_demo, identity_params, synthetic_teacher

E = synthetic_teacher(8, 16, seed=0)
res = distill_demo(E, iters=200, seed=0)
for k in (0, 10, 50, 100, 200):
    print(f"iter {k:3d}  loss {res.losses[k]:.5f}  |grad| {res.grad_norms[k]:.4f}")

# %%
A = res.params[:16].reshape(4, 4)
print("fitted A (close to I):")
print(np.round(A, 3))
print("distance from identity params:", np.linalg.norm(res.params - identity_params(4)))
