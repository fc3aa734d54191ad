"""Running Life through the engine and validating patterns and glider circuits."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from ..engine import EvolutionTrace, StateConfiguration, evolve, threshold_decoder
from ..errors import ValidationError
from ..graph import GraphStructure, grid_graph
from ..rules import life_rule
from .reference import simulate
from .rle import GridPattern, read_rle

__all__ = [
    "Rect",
    "InputSite",
    "PatternSpec",
    "ValidationReport",
    "KINDS",
    "GLIDERS",
    "arena_graph",
    "embed",
    "frame",
    "run_life",
    "validate_pattern",
    "parse_spec",
    "load_spec",
    "asset_path",
    "load_asset",
    "DEFAULT_MARGIN",
    "random_soup",
    "soup_check",
]

KINDS = ("still-life", "oscillator", "spaceship", "gun", "gate-circuit")
DEFAULT_MARGIN = 20

# one phase of the glider for each travel direction, cells inside a 3x3 box
GLIDERS = {
    "se": frozenset({(0, 1), (1, 2), (2, 0), (2, 1), (2, 2)}),
    "sw": frozenset({(0, 1), (1, 0), (2, 0), (2, 1), (2, 2)}),
    "ne": frozenset({(2, 1), (1, 2), (0, 0), (0, 1), (0, 2)}),
    "nw": frozenset({(2, 1), (1, 0), (0, 0), (0, 1), (0, 2)}),
}

_LIFE = life_rule()


@dataclass(frozen=True)
class Rect:
    """Inclusive cell rectangle ``rows r0..r1, cols c0..c1``."""

    r0: int
    c0: int
    r1: int
    c1: int

    def __post_init__(self):
        if self.r1 < self.r0 or self.c1 < self.c0:
            raise ValidationError(f"empty rectangle {self}")

    def shifted(self, dr: int, dc: int) -> Rect:
        return Rect(self.r0 + dr, self.c0 + dc, self.r1 + dr, self.c1 + dc)

    def slice(self, grid: np.ndarray) -> np.ndarray:
        return grid[self.r0: self.r1 + 1, self.c0: self.c1 + 1]

    def inside(self, rows: int, cols: int) -> bool:
        return self.r0 >= 0 and self.c0 >= 0 and self.r1 < rows and self.c1 < cols


@dataclass(frozen=True)
class InputSite:
    name: str
    rect: Rect
    direction: str

    def cells(self) -> frozenset:
        return frozenset((self.rect.r0 + r, self.rect.c0 + c) for r, c in GLIDERS[self.direction])


@dataclass(frozen=True)
class PatternSpec:
    kind: str
    period: int = 1
    name: str = ""
    displacement: tuple[int, int] | None = None
    probe: Rect | None = None
    body: Rect | None = None
    t0: int = 0
    samples: int = 5
    signature: int = 5
    first_within: int | None = None
    read_time: int | None = None
    inputs: tuple[InputSite, ...] = ()
    truth_table: tuple[tuple[tuple[int, ...], int], ...] = ()
    arena: tuple[int, int] | None = None
    offset: tuple[int, int] | None = None
    boundary: str = "dead"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown pattern kind {self.kind!r}; expected one of {KINDS}")
        if self.period < 1:
            raise ValidationError(f"period must be positive, got {self.period}")
        if self.kind == "spaceship" and (self.displacement is None or self.displacement == (0, 0)):
            raise ValidationError("a spaceship spec needs a nonzero displacement")
        if self.kind == "gun" and (self.probe is None or self.body is None):
            raise ValidationError("a gun spec needs probe and body rectangles")
        if self.kind == "gate-circuit":
            if not self.truth_table:
                raise ValidationError("a gate-circuit spec needs a non-empty truth table")
            if self.probe is None or self.read_time is None:
                raise ValidationError("a gate-circuit spec needs a probe rectangle and a read time")
            arity = len(self.inputs)
            if arity == 0 or any(len(bits) != arity for bits, _ in self.truth_table):
                raise ValidationError(f"truth-table rows must have one bit per input site ({arity})")


@dataclass
class ValidationReport:
    name: str
    kind: str
    passed: bool
    accuracy: float
    rows: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.accuracy = float(self.accuracy)

    def to_json(self) -> str:
        return json.dumps(
            {"name": self.name, "kind": self.kind, "passed": self.passed, "accuracy": self.accuracy,
             "rows": self.rows, "details": self.details},
            sort_keys=True, separators=(",", ":"),
        )


# -- running --------------------------------------------------------------------

@lru_cache(maxsize=32)
def arena_graph(rows: int, cols: int, boundary: str = "dead") -> GraphStructure:
    return grid_graph(rows, cols, "moore8", boundary)


def _place(cells, arena, offset) -> np.ndarray:
    rows, cols = arena
    grid = np.zeros((rows, cols))
    r0, c0 = offset
    for r, c in cells:
        rr, cc = r + r0, c + c0
        if not (0 <= rr < rows and 0 <= cc < cols):
            raise ValidationError(f"cell ({r}, {c}) at offset {offset} falls outside the {rows}x{cols} arena")
        grid[rr, cc] = 1.0
    return grid


def embed(p: GridPattern, arena: tuple[int, int], offset: tuple[int, int] = (0, 0),
          extra_cells=()) -> StateConfiguration:
    """Arena state with the pattern's box placed at ``offset``."""
    rows, cols = arena
    r0, c0 = offset
    if r0 < 0 or c0 < 0 or r0 + p.height > rows or c0 + p.width > cols:
        raise ValidationError(
            f"{p.height}x{p.width} pattern at offset {offset} does not fit the {rows}x{cols} arena"
        )
    grid = _place(set(p.cells) | set(extra_cells), arena, offset)
    return StateConfiguration(grid.reshape(-1, 1))


def frame(H: StateConfiguration, arena: tuple[int, int]) -> np.ndarray:
    """Decode an arena state to a ``rows x cols`` 0/1 grid."""
    return threshold_decoder(H).reshape(arena).astype(np.uint8)


def run_life(p: GridPattern, steps: int, arena: tuple[int, int], offset: tuple[int, int] = (0, 0),
             boundary: str = "dead", capture: str = "all", extra_cells=()) -> EvolutionTrace:
    """Embed ``p`` in an arena and evolve it under B3/S23 through the engine."""
    H0 = embed(p, arena, offset, extra_cells)
    return evolve(H0, arena_graph(arena[0], arena[1], boundary), _LIFE, steps, capture=capture)


def _frames(p, steps, arena, offset, boundary, extra_cells=()):
    trace = run_life(p, steps, arena, offset, boundary, extra_cells=extra_cells)
    return [frame(H, arena) for H in trace.states]


def random_soup(size: int, seed, density: float = 0.5) -> np.ndarray:
    return (np.random.default_rng(seed).random((size, size)) < density).astype(np.uint8)


def soup_check(count: int = 1000, size: int = 32, steps: int = 10, seed: int = 0, density: float = 0.5,
               boundary: str = "dead", oracle: str = "shifted") -> list[tuple[int, int]]:
    """Compare engine Life against a graph-free simulator on seeded random soups.

    Soup ``k`` is drawn with seed ``(seed, k)``. Returns ``(soup, step)`` for
    the first differing step of every soup that disagrees anywhere.
    """
    arena = (size, size)
    g = arena_graph(size, size, boundary)
    bad = []
    for k in range(count):
        soup = random_soup(size, [seed, k], density)
        expected = simulate(soup, steps, boundary, oracle)
        trace = evolve(StateConfiguration(soup.reshape(-1, 1)), g, _LIFE, steps)
        for t, H in enumerate(trace.states):
            if not np.array_equal(frame(H, arena), expected[t]):
                bad.append((k, t))
                break
    return bad


# -- validation -----------------------------------------------------------------

def _default_placement(p: GridPattern, spec: PatternSpec, arena, offset):
    if offset is None:
        offset = spec.offset if spec.offset is not None else (DEFAULT_MARGIN, DEFAULT_MARGIN)
    if arena is None:
        arena = spec.arena if spec.arena is not None else (
            p.height + offset[0] + DEFAULT_MARGIN, p.width + offset[1] + DEFAULT_MARGIN
        )
    return tuple(arena), tuple(offset)


def _shift(grid, dr, dc):
    rows, cols = grid.shape
    out = np.zeros_like(grid)
    live = np.argwhere(grid)
    if len(live) == 0:
        return out
    moved = live + (dr, dc)
    if (moved < 0).any() or (moved[:, 0] >= rows).any() or (moved[:, 1] >= cols).any():
        return None
    out[moved[:, 0], moved[:, 1]] = 1
    return out


def validate_pattern(p: GridPattern, spec: PatternSpec, arena=None, offset=None) -> ValidationReport:
    """Check that ``p`` behaves as ``spec`` claims when run through the engine.

    Placement defaults to the pattern spec's arena/offset, else a 20-cell margin on
    every side of the pattern box.
    """
    arena, offset = _default_placement(p, spec, arena, offset)
    name = spec.name or p.name
    kind = spec.kind
    if kind in ("still-life", "oscillator"):
        period = 1 if kind == "still-life" else spec.period
        fr = _frames(p, period, arena, offset, spec.boundary)
        repeats = bool(np.array_equal(fr[period], fr[0]))
        early = [q for q in range(1, period) if period % q == 0 and np.array_equal(fr[q], fr[0])]
        passed = repeats and not early and fr[0].any()
        return ValidationReport(name, kind, passed, float(passed),
                                details={"period": period, "repeats": repeats, "smaller_period": early[:1]})
    if kind == "spaceship":
        fr = _frames(p, spec.period, arena, offset, spec.boundary)
        moved = _shift(fr[0], *spec.displacement)
        passed = moved is not None and bool(np.array_equal(fr[spec.period], moved)) and fr[0].any()
        return ValidationReport(name, kind, passed, float(passed),
                                details={"period": spec.period, "displacement": list(spec.displacement)})
    if kind == "gun":
        return _validate_gun(p, spec, arena, offset, name)
    return _validate_gate(p, spec, arena, offset, name)


def _validate_gun(p, spec, arena, offset, name):
    probe = spec.probe.shifted(*offset)
    body = spec.body.shifted(*offset)
    if not probe.inside(*arena) or not body.inside(*arena):
        raise ValidationError("gun probe or body rectangle falls outside the arena")
    times = [spec.t0 + k * spec.period for k in range(spec.samples)]
    fr = _frames(p, times[-1], arena, offset, spec.boundary)
    counts = [int(probe.slice(fr[t]).sum()) for t in times]
    body_ok = all(np.array_equal(body.slice(fr[t]), body.slice(fr[times[0]])) for t in times)
    first = next((t for t, g in enumerate(fr) if probe.slice(g).any()), None)
    emissions = sum(c == spec.signature for c in counts)
    passed = emissions == spec.samples and body_ok
    if spec.first_within is not None:
        passed = passed and first is not None and first <= spec.first_within
    rows = [{"time": t, "probe_count": c, "passed": c == spec.signature} for t, c in zip(times, counts)]
    return ValidationReport(
        name, "gun", bool(passed), emissions / spec.samples, rows,
        details={"period": spec.period, "emissions": emissions, "body_repeats": body_ok,
                 "first_detection": first},
    )


def _validate_gate(p, spec, arena, offset, name):
    probe = spec.probe.shifted(*offset)
    if not probe.inside(*arena):
        raise ValidationError("gate probe rectangle falls outside the arena")
    rows = []
    for bits, expected in spec.truth_table:
        extra = set()
        for bit, site in zip(bits, spec.inputs):
            if bit:
                extra |= site.cells()
        trace = run_life(p, spec.read_time, arena, offset, spec.boundary, capture="endpoints", extra_cells=extra)
        observed = int(probe.slice(frame(trace.final, arena)).any())
        rows.append({"inputs": "".join(map(str, bits)), "expected": expected, "observed": observed,
                     "passed": observed == expected})
    accuracy = sum(r["passed"] for r in rows) / len(rows)
    return ValidationReport(name, "gate-circuit", accuracy == 1.0, accuracy, rows,
                            details={"read_time": spec.read_time})


# -- spec files: "key = value" lines, '#' comments; input/row keys repeat ----------

def _ints(value, n, lineno, key):
    parts = value.split()
    if len(parts) != n:
        raise ValidationError(f"line {lineno}: {key} needs {n} integers, got {value!r}")
    try:
        return tuple(int(v) for v in parts)
    except ValueError:
        raise ValidationError(f"line {lineno}: {key} needs integers, got {value!r}") from None


def parse_spec(text: str) -> PatternSpec:
    fields = {}
    inputs, table = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in ("name", "kind", "boundary"):
            fields[key] = value
        elif key in ("period", "t0", "samples", "signature", "first_within", "read_time"):
            fields[key] = _ints(value, 1, lineno, key)[0]
        elif key in ("displacement", "arena", "offset"):
            fields[key] = _ints(value, 2, lineno, key)
        elif key in ("probe", "body"):
            fields[key] = Rect(*_ints(value, 4, lineno, key))
        elif key == "input":
            parts = value.split()
            if len(parts) != 6 or parts[5] not in GLIDERS:
                raise ValidationError(f"line {lineno}: input needs 'name r0 c0 r1 c1 direction'")
            rect = Rect(*_ints(" ".join(parts[1:5]), 4, lineno, key))
            if (rect.r1 - rect.r0, rect.c1 - rect.c0) != (2, 2):
                raise ValidationError(f"line {lineno}: input site must be a 3x3 rectangle")
            inputs.append(InputSite(parts[0], rect, parts[5]))
        elif key == "row":
            if "->" not in value:
                raise ValidationError(f"line {lineno}: row needs 'bits -> bit'")
            lhs, rhs = (s.strip() for s in value.split("->"))
            if set(lhs) - {"0", "1"} or rhs not in ("0", "1"):
                raise ValidationError(f"line {lineno}: bad truth-table row {value!r}")
            table.append((tuple(int(b) for b in lhs), int(rhs)))
        else:
            raise ValidationError(f"line {lineno}: unknown key {key!r}")
    if "kind" not in fields:
        raise ValidationError("spec is missing 'kind'")
    return PatternSpec(inputs=tuple(inputs), truth_table=tuple(table), **fields)


def load_spec(path) -> PatternSpec:
    return parse_spec(Path(path).read_text())


def asset_path(name: str) -> Path:
    """Path of a shipped asset, e.g. ``asset_path("glider.rle")``."""
    return Path(str(resources.files("aspp.life").joinpath("assets", name)))


def load_asset(stem: str) -> tuple[GridPattern, PatternSpec]:
    return read_rle(asset_path(f"{stem}.rle")), load_spec(asset_path(f"{stem}.spec"))
