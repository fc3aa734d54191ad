"""Embedding distillation at desk scale.

Teacher embeddings are projected into the engine's state space, evolved for
``K`` steps on a token chain, and compared with the projection itself under a
mean squared error. A small affine rule is fitted by finite-difference
gradient descent.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .engine import StateConfiguration, evolve
from .errors import NumericError, ValidationError
from .graph import GraphStructure, chain_graph
from .rules import UpdateRule

__all__ = [
    "synthetic_teacher",
    "random_projection",
    "project",
    "distill_loss",
    "affine_blend_rule",
    "param_count",
    "identity_params",
    "numerical_gradient",
    "DistillResult",
    "distill_demo",
    "MAX_PARAMS",
]

MAX_PARAMS = 64


def synthetic_teacher(n_tokens: int = 8, d_teacher: int = 16, seed: int = 0) -> np.ndarray:
    """Stand-in teacher embeddings, ``n_tokens x d_teacher`` standard normal."""
    return np.random.default_rng(seed).standard_normal((n_tokens, d_teacher))


def random_projection(d_teacher: int, d: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal((d_teacher, d)) / np.sqrt(d_teacher)


def project(E, W) -> StateConfiguration:
    """Row-wise projection ``E @ W`` of ``n x d_teacher`` embeddings to ``n x d`` states."""
    E = np.asarray(E, dtype=float)
    W = np.asarray(W, dtype=float)
    if E.ndim != 2 or W.ndim != 2 or E.shape[1] != W.shape[0]:
        raise ValidationError(f"cannot project embeddings {E.shape} with map {W.shape}")
    if not np.isfinite(E).all():
        raise ValidationError("teacher embeddings contain non-finite entries")
    return StateConfiguration(E @ W)


def distill_loss(H_K: StateConfiguration, E_proj: StateConfiguration) -> float:
    """Mean squared difference over all entries."""
    if H_K.values.shape != E_proj.values.shape:
        raise ValidationError(f"shape mismatch {H_K.values.shape} vs {E_proj.values.shape}")
    with np.errstate(over="ignore"):
        return float(np.mean((H_K.values - E_proj.values) ** 2))


def param_count(d: int) -> int:
    return d * d + d + 1


def identity_params(d: int) -> np.ndarray:
    """Parameters for which every configuration is a fixed point."""
    p = np.zeros(param_count(d))
    p[: d * d] = np.eye(d).ravel()
    return p


def affine_blend_rule(params, d: int) -> UpdateRule:
    """``h' = A h + b + beta * (mean(neighbors) - h)`` with ``params = [A.ravel(), b, beta]``."""
    params = np.asarray(params, dtype=float)
    if params.shape != (param_count(d),):
        raise ValidationError(f"expected {param_count(d)} parameters for d={d}, got {params.shape}")
    if param_count(d) > MAX_PARAMS:
        raise ValidationError(f"d={d} needs {param_count(d)} parameters, above the cap of {MAX_PARAMS}")
    A = params[: d * d].reshape(d, d)
    b = params[d * d: d * d + d]
    beta = params[-1]

    def local(own, nbrs, view):
        pull = nbrs.mean(axis=0) - own if len(nbrs) else np.zeros(d)
        return A @ own + b + beta * pull

    def batch(H, g):
        deg = g.in_degree()
        sums = g.adjacency(weighted=False) @ H
        means = np.where(deg[:, None] > 0, sums / np.maximum(deg, 1)[:, None], H)
        with np.errstate(over="ignore", invalid="ignore"):
            return H @ A.T + b + beta * (means - H)

    return UpdateRule(d, local, batch=batch, name="affine-blend")


def numerical_gradient(f: Callable[[np.ndarray], float], theta, eps: float = 1e-5) -> np.ndarray:
    """Central differences ``(f(theta + eps e_k) - f(theta - eps e_k)) / (2 eps)``."""
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for k in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[k] += eps
        down[k] -= eps
        grad[k] = (f(up) - f(down)) / (2 * eps)
    return grad


@dataclass
class DistillResult:
    losses: list[float]
    grad_norms: list[float]
    params: np.ndarray
    target: StateConfiguration = field(repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "loss", "grad_norm"])
        for k, (loss, gn) in enumerate(zip(self.losses, self.grad_norms)):
            w.writerow([k, repr(loss), repr(gn)])
        return buf.getvalue()


def distill_demo(E, graph: GraphStructure | None = None, rule_params=None, K: int = 3,
                 iters: int = 200, step_size: float = 0.1, fd_eps: float = 1e-5, seed: int = 0,
                 d: int = 4, W=None) -> DistillResult:
    """Fit the affine blend rule so ``K`` steps from ``E_proj`` land back on ``E_proj``.

    ``losses[k]`` and ``grad_norms[k]`` describe the parameters before update
    ``k``; the final entry (index ``iters``) describes the returned parameters.
    Defaults: a token chain graph, a seeded random projection, and seeded
    parameters near ``0.5 * I``.
    """
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    E = np.asarray(E, dtype=float)
    rng = np.random.default_rng(seed)
    if W is None:
        W = random_projection(E.shape[1], d, seed)
    target = project(E, W)
    d = target.d
    g = chain_graph(target.n) if graph is None else graph
    if rule_params is None:
        theta = identity_params(d)
        theta[: d * d] *= 0.5
        theta += rng.normal(0, 0.05, theta.shape)
    else:
        theta = np.array(rule_params, dtype=float)

    def loss(p):
        return distill_loss(evolve(target, g, affine_blend_rule(p, d), K, capture="endpoints").final, target)

    losses, norms = [], []
    for it in range(iters + 1):
        try:
            value = loss(theta)
            grad = numerical_gradient(loss, theta, fd_eps)
        except NumericError as exc:
            raise NumericError(f"iteration {it}: evolution diverged ({exc}); params={theta.tolist()}") from exc
        if not np.isfinite(value) or not np.isfinite(grad).all():
            raise NumericError(f"iteration {it}: loss {value}, gradient finite={np.isfinite(grad).all()}; "
                               f"params={theta.tolist()}")
        losses.append(value)
        norms.append(float(np.linalg.norm(grad)))
        if it < iters:
            theta = theta - step_size * grad
    return DistillResult(losses, norms, theta, target)
