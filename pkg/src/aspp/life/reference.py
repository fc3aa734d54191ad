"""Graph-free Life simulators used as oracles for the engine.

Neither touches the graph or rule machinery: ``naive_step`` counts neighbors
cell by cell with explicit loops over a cached offset table, ``shifted_step``
sums eight shifted copies of the grid.

On a torus narrower than three cells several offsets wrap onto the same cell;
each distinct neighbor is counted once, matching the no-duplicate-edge grids.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["naive_step", "shifted_step", "simulate"]


@lru_cache(maxsize=16)
def _neighbor_table(rows: int, cols: int, boundary: str) -> tuple[tuple[int, ...], ...]:
    table = []
    for r in range(rows):
        for c in range(cols):
            seen = set()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if boundary == "toroidal":
                        rr, cc = rr % rows, cc % cols
                    elif not (0 <= rr < rows and 0 <= cc < cols):
                        continue
                    if (rr, cc) != (r, c):
                        seen.add(rr * cols + cc)
            table.append(tuple(sorted(seen)))
    return tuple(table)


def naive_step(grid, boundary: str = "dead") -> list[list[int]]:
    rows, cols = len(grid), len(grid[0])
    flat = [v for row in grid for v in row]
    table = _neighbor_table(rows, cols, boundary)
    out = []
    for i, nbrs in enumerate(table):
        n = 0
        for j in nbrs:
            n += flat[j]
        out.append(1 if n == 3 or (flat[i] and n == 2) else 0)
    return [out[r * cols: (r + 1) * cols] for r in range(rows)]


def shifted_step(grid, boundary: str = "dead") -> np.ndarray:
    grid = np.asarray(grid, dtype=np.uint8)
    rows, cols = grid.shape
    if boundary == "toroidal":
        if rows < 3 or cols < 3:
            return np.array(naive_step(grid.tolist(), boundary), dtype=np.uint8)
        padded = np.pad(grid, 1, mode="wrap")
    else:
        padded = np.pad(grid, 1)
    count = np.zeros(grid.shape, dtype=np.int16)
    for dr in (0, 1, 2):
        for dc in (0, 1, 2):
            if dr != 1 or dc != 1:
                count += padded[dr: dr + rows, dc: dc + cols]
    return ((count == 3) | ((grid == 1) & (count == 2))).astype(np.uint8)


def simulate(grid, steps: int, boundary: str = "dead", method: str = "shifted") -> list[np.ndarray]:
    """All generations ``0..steps`` of ``grid``."""
    fn = {"shifted": shifted_step, "naive": lambda g, b: np.array(naive_step(g.tolist(), b), dtype=np.uint8)}[method]
    out = [np.asarray(grid, dtype=np.uint8)]
    for _ in range(steps):
        out.append(fn(out[-1], boundary))
    return out
