"""Synchronous graph operators: a sparse message-passing engine with Life,
contraction, MPNN, coloring and distillation experiments built on it."""
from .engine import (
    EvolutionTrace,
    FixedPointResult,
    StateConfiguration,
    decode,
    evolve,
    evolve_to_fixed_point,
    learned_k,
    step,
    sup_distance,
    workers,
)
from .errors import DomainError, GraphError, NumericError, ValidationError
from .graph import GraphStructure, build_graph, chain_graph, diameter, grid_graph, random_graph
from .rules import (
    ColoringRuleConfig,
    MpnnFunctions,
    UpdateRule,
    coloring_rule,
    identity_rule,
    life_rule,
    linear_contraction_rule,
    mpnn_rule,
)

__version__ = "0.1.0"

__all__ = [
    "ColoringRuleConfig",
    "DomainError",
    "EvolutionTrace",
    "FixedPointResult",
    "GraphError",
    "GraphStructure",
    "MpnnFunctions",
    "NumericError",
    "StateConfiguration",
    "UpdateRule",
    "ValidationError",
    "build_graph",
    "chain_graph",
    "coloring_rule",
    "decode",
    "diameter",
    "evolve",
    "evolve_to_fixed_point",
    "grid_graph",
    "identity_rule",
    "learned_k",
    "life_rule",
    "linear_contraction_rule",
    "mpnn_rule",
    "random_graph",
    "step",
    "sup_distance",
    "workers",
]
