"""Synchronous application of a local rule over a graph.

``step`` builds every node's next state from the same frozen input
configuration (Jacobi semantics), so the result does not depend on the order
or thread in which nodes are visited.
"""
from __future__ import annotations

import contextlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import expit

from .errors import NumericError, ValidationError
from .graph import GraphStructure
from .rules import UpdateRule

__all__ = [
    "StateConfiguration",
    "EvolutionTrace",
    "FixedPointResult",
    "step",
    "evolve",
    "evolve_to_fixed_point",
    "learned_k",
    "decode",
    "argmax_decoder",
    "threshold_decoder",
    "raw_decoder",
    "sup_distance",
    "workers",
    "format_state",
    "parse_state",
    "read_state",
    "write_state",
]

DEFAULT_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class StateConfiguration:
    """Per-node state vectors, stored as a read-only ``(n, d)`` float array."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(f"state must be an (n, d) array, got shape {v.shape}")
        if not np.isfinite(v).all():
            bad = int(np.argwhere(~np.isfinite(v))[0, 0])
            raise NumericError(f"state of node {bad} is not finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, n: int, d: int) -> StateConfiguration:
        return cls(np.zeros((n, d)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def distance(self, other: StateConfiguration) -> float:
        return sup_distance(self, other)

    def __eq__(self, other):
        if not isinstance(other, StateConfiguration):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.values.shape, self.values.tobytes()))

    def __repr__(self):
        return f"StateConfiguration(n={self.n}, d={self.d})"


def sup_distance(a: StateConfiguration, b: StateConfiguration) -> float:
    """``max_i ||a_i - b_i||_inf``."""
    if a.values.shape != b.values.shape:
        raise ValidationError(f"shape mismatch {a.values.shape} vs {b.values.shape}")
    return float(np.max(np.abs(a.values - b.values)))


@dataclass
class EvolutionTrace:
    states: list[StateConfiguration]
    step_distances: list[float] = field(default_factory=list)
    converged_at: int | None = None

    @property
    def final(self) -> StateConfiguration:
        return self.states[-1]

    @property
    def initial(self) -> StateConfiguration:
        return self.states[0]

    @property
    def steps(self) -> int:
        return len(self.step_distances)


class FixedPointResult(NamedTuple):
    state: StateConfiguration
    steps: int
    converged: bool


# -- worker pool ----------------------------------------------------------------

_workers = max(1, int(os.environ.get("ASPP_THREADS", "1") or 1))


@contextlib.contextmanager
def workers(count: int):
    """Cap the threads used by per-node stepping inside the block."""
    global _workers
    old, _workers = _workers, max(1, int(count))
    try:
        yield
    finally:
        _workers = old


def _check_pair(H: StateConfiguration, g: GraphStructure, rule: UpdateRule):
    if H.n != g.node_count:
        raise ValidationError(f"state has {H.n} nodes but graph has {g.node_count}")
    if H.d != rule.dim:
        raise ValidationError(f"state dimension {H.d} does not match rule dimension {rule.dim}")


def _per_node(src, g, rule, nodes, out):
    views = g.neighbor_views
    for i in nodes:
        view = views[i]
        new = np.asarray(rule.local(src[i], src[view.sources], view), dtype=float)
        if new.shape != (rule.dim,):
            raise ValidationError(f"rule returned shape {new.shape} at node {i}, expected ({rule.dim},)")
        out[i] = new


def step(H: StateConfiguration, g: GraphStructure, rule: UpdateRule, *,
         order=None, vectorized: bool = True) -> StateConfiguration:
    """One synchronous application of ``rule`` to every node.

    ``order`` fixes the node visiting schedule of the per-node path (any
    permutation gives the same result). ``vectorized=False`` forces the
    per-node path even when the rule has a batch implementation.
    """
    _check_pair(H, g, rule)
    src = H.values
    if rule.batch is not None and vectorized and order is None:
        out = np.asarray(rule.batch(src, g), dtype=float)
        if out.shape != src.shape:
            raise ValidationError(f"batch rule returned shape {out.shape}, expected {src.shape}")
    else:
        nodes = list(range(H.n)) if order is None else [int(i) for i in order]
        if sorted(nodes) != list(range(H.n)):
            raise ValidationError("order must be a permutation of the node indices")
        out = np.empty_like(src)
        nw = min(_workers, len(nodes))
        if nw > 1:
            chunks = [nodes[k::nw] for k in range(nw)]
            with ThreadPoolExecutor(nw) as pool:
                list(pool.map(lambda c: _per_node(src, g, rule, c, out), chunks))
        else:
            _per_node(src, g, rule, nodes, out)
    finite = np.isfinite(out).all(axis=1)
    if not finite.all():
        raise NumericError(f"rule {rule.name!r} produced a non-finite state at node {int(np.argmin(finite))}")
    return StateConfiguration(out)


def evolve(H0: StateConfiguration, g: GraphStructure, rule: UpdateRule, K: int,
           capture: str = "all", **step_kw) -> EvolutionTrace:
    """``K`` synchronous steps from ``H0``.

    With ``capture="endpoints"`` only the first and last configurations are
    kept; step distances are always recorded.
    """
    if K < 0:
        raise ValidationError(f"K must be >= 0, got {K}")
    if capture not in ("all", "endpoints"):
        raise ValidationError(f"capture must be 'all' or 'endpoints', got {capture!r}")
    _check_pair(H0, g, rule)
    states, dists = [H0], []
    H = H0
    for _ in range(K):
        nxt = step(H, g, rule, **step_kw)
        dists.append(sup_distance(nxt, H))
        H = nxt
        if capture == "all":
            states.append(H)
    if capture == "endpoints" and K > 0:
        states.append(H)
    return EvolutionTrace(states, dists)


def evolve_to_fixed_point(H0: StateConfiguration, g: GraphStructure, rule: UpdateRule,
                          tol: float = DEFAULT_TOL, max_steps: int = 1000, **step_kw) -> FixedPointResult:
    """Iterate until two consecutive configurations are within ``tol``.

    Returns ``(H^(t+1), t+1, True)`` at the first such step, otherwise the
    configuration after ``max_steps`` with ``converged=False``.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if max_steps < 1:
        raise ValidationError(f"max_steps must be >= 1, got {max_steps}")
    H = H0
    for t in range(max_steps):
        nxt = step(H, g, rule, **step_kw)
        if sup_distance(nxt, H) <= tol:
            return FixedPointResult(nxt, t + 1, True)
        H = nxt
    return FixedPointResult(H, max_steps, False)


def learned_k(theta_k: float, k_max: int) -> int:
    """Step budget ``floor(sigmoid(theta_k) * k_max) + 1``, kept within ``[1, k_max]``.

    The logistic saturates to exactly 1.0 in double precision for large
    ``theta_k``; the upper clamp keeps the mathematical bound.
    """
    if k_max < 1:
        raise ValidationError(f"k_max must be >= 1, got {k_max}")
    if not math.isfinite(theta_k):
        raise ValidationError(f"theta_k must be finite, got {theta_k}")
    return min(int(math.floor(expit(theta_k) * k_max)) + 1, int(k_max))


# -- decoders --------------------------------------------------------------------

Decoder = Callable[[StateConfiguration], np.ndarray]


def argmax_decoder(H: StateConfiguration) -> np.ndarray:
    """Per-node index of the largest channel; ties go to the lowest index."""
    return np.argmax(H.values, axis=1)


def threshold_decoder(H: StateConfiguration, level: float = 0.5) -> np.ndarray:
    return (H.values[:, 0] >= level).astype(np.int8)


def raw_decoder(H: StateConfiguration) -> np.ndarray:
    return H.values.copy()


_DECODERS = {"argmax": argmax_decoder, "threshold": threshold_decoder, "raw": raw_decoder}


def decode(H: StateConfiguration, dec: Decoder | str = "argmax"):
    if isinstance(dec, str):
        try:
            dec = _DECODERS[dec]
        except KeyError:
            raise ValidationError(f"unknown decoder {dec!r}; expected one of {sorted(_DECODERS)}") from None
    return dec(H)


# -- text format: header "n d", then n rows of d values ------------------------------

def format_state(H: StateConfiguration) -> str:
    lines = [f"{H.n} {H.d}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in H.values]
    return "\n".join(lines) + "\n"


def parse_state(text: str) -> StateConfiguration:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValidationError("state file must start with 'n d'")
    n, d = int(rows[0][0]), int(rows[0][1])
    body = rows[1:]
    if len(body) != n or any(len(r) != d for r in body):
        raise ValidationError(f"state file body does not match header {n} x {d}")
    return StateConfiguration(np.array([[float(v) for v in r] for r in body]).reshape(n, d))


def read_state(path) -> StateConfiguration:
    return parse_state(Path(path).read_text())


def write_state(H: StateConfiguration, path) -> None:
    Path(path).write_text(format_state(H))
