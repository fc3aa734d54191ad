"""Run-length-encoded Life patterns."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ValidationError

__all__ = ["GridPattern", "RLEError", "parse_rle", "emit_rle", "read_rle", "write_rle"]

_HEADER = re.compile(r"^\s*x\s*=\s*(\d+)\s*,\s*y\s*=\s*(\d+)\s*(?:,\s*rule\s*=\s*(\S+))?\s*$", re.I)
_WRAP = 70


class RLEError(ValidationError):
    def __init__(self, msg, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line, self.col = line, col


@dataclass(frozen=True)
class GridPattern:
    """Live cells ``(row, col)`` inside a ``height x width`` box."""

    width: int
    height: int
    cells: frozenset
    name: str = ""

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"pattern box must be at least 1x1, got {self.width}x{self.height}")
        cells = frozenset((int(r), int(c)) for r, c in self.cells)
        for r, c in cells:
            if not (0 <= r < self.height and 0 <= c < self.width):
                raise ValidationError(f"cell ({r}, {c}) lies outside the {self.height}x{self.width} box")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, GridPattern):
            return NotImplemented
        return (self.width, self.height, self.cells) == (other.width, other.height, other.cells)

    def __hash__(self):
        return hash((self.width, self.height, self.cells))

    @property
    def population(self) -> int:
        return len(self.cells)

    @classmethod
    def from_array(cls, grid, name: str = "") -> GridPattern:
        grid = np.asarray(grid)
        rows, cols = np.nonzero(grid)
        return cls(grid.shape[1], grid.shape[0], frozenset(zip(rows.tolist(), cols.tolist())), name)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.height, self.width), dtype=np.uint8)
        for r, c in self.cells:
            out[r, c] = 1
        return out

    def __str__(self):
        return "\n".join("".join("#" if v else "." for v in row) for row in self.to_array())


def parse_rle(text: str, name: str = "") -> GridPattern:
    """Decode an RLE pattern.

    ``#`` lines are comments (``#N`` supplies a name). The header is
    ``x = W, y = H`` with an optional ``rule`` field, which must be B3/S23.
    """
    lines = text.splitlines()
    header_at = None
    for k, line in enumerate(lines):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped[:2] in ("#N", "#n") and not name:
                name = stripped[2:].strip()
            continue
        header_at = k
        break
    if header_at is None:
        raise RLEError("missing 'x = W, y = H' header")
    m = _HEADER.match(lines[header_at])
    if not m:
        raise RLEError(f"malformed header {lines[header_at].strip()!r}", header_at + 1, 1)
    width, height = int(m.group(1)), int(m.group(2))
    if m.group(3) and m.group(3).upper() not in ("B3/S23", "23/3"):
        raise RLEError(f"unsupported rule {m.group(3)!r}", header_at + 1, m.start(3) + 1)
    if width < 1 or height < 1:
        raise RLEError("pattern box must be at least 1x1", header_at + 1, 1)

    cells = set()
    row = col = 0
    count = ""
    done = False
    for k in range(header_at + 1, len(lines)):
        line = lines[k]
        if line.lstrip().startswith("#"):
            continue
        for j, ch in enumerate(line):
            if done:
                break
            if ch.isspace():
                continue
            if ch.isdigit():
                count += ch
                continue
            run = int(count) if count else 1
            count = ""
            if ch == "b":
                col += run
            elif ch == "o":
                if col + run > width:
                    raise RLEError(f"run of {run} live cells overflows width {width}", k + 1, j + 1)
                if row >= height:
                    raise RLEError(f"live cells on row {row}, beyond height {height}", k + 1, j + 1)
                cells.update((row, col + i) for i in range(run))
                col += run
            elif ch == "$":
                row += run
                col = 0
            elif ch == "!":
                done = True
                break
            else:
                raise RLEError(f"unexpected symbol {ch!r}", k + 1, j + 1)
            if col > width:
                raise RLEError(f"row {row} extends past width {width}", k + 1, j + 1)
        if done:
            break
    if not done:
        raise RLEError("missing '!' terminator", len(lines), 1)
    if count:
        raise RLEError("dangling run count before '!'", len(lines), 1)
    return GridPattern(width, height, frozenset(cells), name)


def _tokens(p: GridPattern):
    grid = p.to_array()
    prev = 0
    for r in sorted({r for r, _ in p.cells}):
        row = grid[r]
        alive = np.nonzero(row)[0]
        if r > prev:
            gap = r - prev
            yield f"{gap}$" if gap > 1 else "$"
        prev = r
        c, end = 0, int(alive[-1]) + 1
        while c < end:
            v = row[c]
            k = c
            while k < end and row[k] == v:
                k += 1
            n = k - c
            yield f"{n if n > 1 else ''}{'o' if v else 'b'}"
            c = k
    yield "!"


def emit_rle(p: GridPattern) -> str:
    """Canonical RLE: maximal runs, no trailing dead cells, body wrapped at 70 columns."""
    out, line = [], ""
    for tok in _tokens(p):
        if len(line) + len(tok) > _WRAP:
            out.append(line)
            line = ""
        line += tok
    out.append(line)
    return f"x = {p.width}, y = {p.height}\n" + "\n".join(out)


def read_rle(path) -> GridPattern:
    path = Path(path)
    return _named(parse_rle(path.read_text()), path.stem)


def _named(p: GridPattern, fallback: str) -> GridPattern:
    return p if p.name else GridPattern(p.width, p.height, p.cells, fallback)


def write_rle(p: GridPattern, path) -> None:
    text = emit_rle(p)
    if p.name:
        text = f"#N {p.name}\n" + text
    Path(path).write_text(text + "\n")
