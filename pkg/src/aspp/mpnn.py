"""Reference message passing and equivalence/influence checks against the engine."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import StateConfiguration, evolve
from .errors import ValidationError
from .graph import GraphStructure, shortest_path_lengths
from .rules import MpnnFunctions, UpdateRule, mpnn_rule

__all__ = [
    "InfluenceMatrix",
    "reference_mpnn_step",
    "check_equivalence",
    "influence_matrix",
    "reachability_within",
    "format_influence",
    "parse_influence",
]

INFLUENCE_THRESHOLD = 1e-9


def reference_mpnn_step(H: StateConfiguration, g: GraphStructure, fns: MpnnFunctions) -> StateConfiguration:
    """One MPNN layer computed by a plain double loop over nodes and in-edges.

    Kept apart from the engine on purpose: it scans the raw edge list rather
    than the graph's neighbor index.
    """
    if H.n != g.node_count or H.d != fns.dim:
        raise ValidationError(f"state {H.n}x{H.d} incompatible with graph n={g.node_count}, d={fns.dim}")
    h = H.values
    out = []
    for i in range(g.node_count):
        sources = sorted(s for s, t, _ in g.edges if t == i)
        m = np.zeros(fns.dim)
        for j in sources:
            m = m + fns.message(h[i], h[j])
        out.append(fns.update(h[i], m))
    return StateConfiguration(np.array(out))


def check_equivalence(g: GraphStructure, fns: MpnnFunctions, H0: StateConfiguration, T: int,
                      rule: UpdateRule | None = None) -> tuple[bool, float]:
    """Compare ``T`` engine steps of the MPNN rule against ``T`` reference steps.

    Returns ``(equal, max_abs_deviation)`` where ``equal`` demands bitwise
    identity. ``rule`` overrides the engine-side rule (used to plant faults).
    """
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    rule = mpnn_rule(fns) if rule is None else rule
    engine_final = evolve(H0, g, rule, T, capture="endpoints").final
    ref = H0
    for _ in range(T):
        ref = reference_mpnn_step(ref, g, fns)
    dev = float(np.max(np.abs(engine_final.values - ref.values)))
    return bool(np.array_equal(engine_final.values, ref.values)), dev


@dataclass(frozen=True, eq=False)
class InfluenceMatrix:
    """``matrix[i, j]`` is true when perturbing node ``j`` moved node ``i``."""

    matrix: np.ndarray
    steps: int

    def __eq__(self, other):
        if not isinstance(other, InfluenceMatrix):
            return NotImplemented
        return self.steps == other.steps and np.array_equal(self.matrix, other.matrix)

    def all_true(self) -> bool:
        return bool(self.matrix.all())


def influence_matrix(rule: UpdateRule, g: GraphStructure, H0: StateConfiguration, T: int,
                     eps: float = 1e-3) -> InfluenceMatrix:
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if T < 0:
        raise ValidationError(f"T must be >= 0, got {T}")
    base = evolve(H0, g, rule, T, capture="endpoints").final.values
    n = g.node_count
    out = np.zeros((n, n), dtype=bool)
    for j in range(n):
        h = H0.values.copy()
        h[j, 0] += eps
        moved = evolve(StateConfiguration(h), g, rule, T, capture="endpoints").final.values
        out[:, j] = np.max(np.abs(moved - base), axis=1) > INFLUENCE_THRESHOLD
    return InfluenceMatrix(out, T)


def reachability_within(g: GraphStructure, T: int) -> np.ndarray:
    """``reach[i, j]``: a directed path ``j -> i`` of at most ``T`` hops exists."""
    dist = shortest_path_lengths(g)
    return ((dist >= 0) & (dist <= T)).T


def format_influence(m: InfluenceMatrix) -> str:
    return "\n".join("".join("1" if v else "0" for v in row) for row in m.matrix) + "\n"


def parse_influence(text: str, steps: int = 0) -> InfluenceMatrix:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if any(set(r) - {"0", "1"} for r in rows) or len({len(r) for r in rows}) > 1:
        raise ValidationError("influence grid must be rows of equal length over '0'/'1'")
    return InfluenceMatrix(np.array([[c == "1" for c in r] for r in rows], dtype=bool), steps)
