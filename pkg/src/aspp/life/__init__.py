"""Conway's Game of Life on the engine: RLE patterns, reference simulators, circuit validation."""
from .machines import (
    GLIDERS,
    InputSite,
    PatternSpec,
    Rect,
    ValidationReport,
    arena_graph,
    asset_path,
    embed,
    frame,
    load_asset,
    load_spec,
    parse_spec,
    random_soup,
    run_life,
    soup_check,
    validate_pattern,
)
from .reference import naive_step, shifted_step, simulate
from .rle import GridPattern, RLEError, emit_rle, parse_rle, read_rle, write_rle

__all__ = [
    "GLIDERS",
    "GridPattern",
    "InputSite",
    "PatternSpec",
    "RLEError",
    "Rect",
    "ValidationReport",
    "arena_graph",
    "asset_path",
    "embed",
    "emit_rle",
    "frame",
    "load_asset",
    "load_spec",
    "naive_step",
    "parse_rle",
    "parse_spec",
    "random_soup",
    "read_rle",
    "run_life",
    "shifted_step",
    "simulate",
    "soup_check",
    "validate_pattern",
    "write_rle",
]
