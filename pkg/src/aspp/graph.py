"""Reasoning-graph structure: construction, neighbor queries, metrics, edge-list I/O."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import GraphError

__all__ = [
    "GraphError",
    "GraphStructure",
    "NeighborView",
    "build_graph",
    "grid_graph",
    "chain_graph",
    "random_graph",
    "diameter",
    "shortest_path_lengths",
    "read_edge_list",
    "write_edge_list",
    "format_edge_list",
    "parse_edge_list",
]

NEIGHBORHOODS = ("moore8", "vonneumann4", "chain-horizontal")
BOUNDARIES = ("dead", "toroidal")


@dataclass(frozen=True)
class NeighborView:
    """In-neighbors of one node, ascending by source index."""

    node: int
    sources: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.sources)


@dataclass(frozen=True, eq=False)
class GraphStructure:
    """Immutable directed graph over nodes ``0..n-1``.

    Edges are stored as ``(source, target, weight)``; a node's update sees the
    sources of its in-edges. Undirected graphs carry both orientations of every
    edge with equal weights.
    """

    node_count: int
    edges: tuple[tuple[int, int, float], ...]
    directed: bool = True
    _csr: sparse.csr_matrix = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.node_count
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise GraphError(f"node_count must be a positive integer, got {n!r}")
        seen = {}
        for e in self.edges:
            s, t, w = e
            if not (0 <= s < n and 0 <= t < n):
                raise GraphError(f"edge {e} has an endpoint outside [0, {n})")
            if not math.isfinite(w):
                raise GraphError(f"edge {e} has a non-finite weight")
            if (s, t) in seen:
                raise GraphError(f"duplicate edge ({s}, {t})")
            seen[(s, t)] = w
        if not self.directed:
            for (s, t), w in seen.items():
                if seen.get((t, s)) != w:
                    raise GraphError(
                        f"undirected graph is missing reverse edge ({t}, {s}) with weight {w}"
                    )
        # row = target, col = source; csr keeps columns sorted per row
        if self.edges:
            src, dst, wts = zip(*self.edges)
        else:
            src, dst, wts = (), (), ()
        m = sparse.csr_matrix(
            (np.asarray(wts, dtype=float), (np.asarray(dst, dtype=np.int64), np.asarray(src, dtype=np.int64))),
            shape=(n, n),
        )
        m.sort_indices()
        m.indices.setflags(write=False)
        m.indptr.setflags(write=False)
        m.data.setflags(write=False)
        object.__setattr__(self, "_csr", m)

    @property
    def n(self) -> int:
        return self.node_count

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def in_neighbors(self, i: int) -> NeighborView:
        lo, hi = self._csr.indptr[i], self._csr.indptr[i + 1]
        return NeighborView(int(i), self._csr.indices[lo:hi], self._csr.data[lo:hi])

    def in_degree(self) -> np.ndarray:
        return self._degree

    @cached_property
    def _degree(self) -> np.ndarray:
        deg = np.diff(self._csr.indptr)
        deg.setflags(write=False)
        return deg

    @cached_property
    def _unit_csr(self) -> sparse.csr_matrix:
        a = self._csr.copy()
        a.data = np.ones_like(a.data)
        return a

    def adjacency(self, weighted: bool = True) -> sparse.csr_matrix:
        """Sparse matrix ``A`` with ``A[i, j]`` set for every edge ``j -> i``.

        ``A @ X`` therefore sums in-neighbor rows of ``X``.
        """
        return self._csr if weighted else self._unit_csr

    @cached_property
    def neighbor_views(self) -> tuple[NeighborView, ...]:
        return tuple(self.in_neighbors(i) for i in range(self.node_count))

    def reversed(self) -> GraphStructure:
        return GraphStructure(
            self.node_count, tuple(sorted((t, s, w) for s, t, w in self.edges)), self.directed
        )

    def edge_set(self) -> dict[tuple[int, int], float]:
        return {(s, t): w for s, t, w in self.edges}

    def __eq__(self, other):
        if not isinstance(other, GraphStructure):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.directed == other.directed
            and self.edge_set() == other.edge_set()
        )

    def __hash__(self):
        return hash((self.node_count, self.directed, frozenset(self.edge_set().items())))


def build_graph(n: int, edges, directed: bool = True) -> GraphStructure:
    """Validate an edge list and build a :class:`GraphStructure`.

    ``edges`` holds ``(source, target)`` or ``(source, target, weight)`` items.
    When ``directed`` is false, missing reverse edges are added with the same
    weight.
    """
    norm = []
    for e in edges:
        if len(e) == 2:
            s, t, w = e[0], e[1], 1.0
        else:
            s, t, w = e
        if not (0 <= s < n and 0 <= t < n):
            raise GraphError(f"edge {tuple(e)} has an endpoint outside [0, {n})")
        norm.append((int(s), int(t), float(w)))
    if not directed:
        present = {(s, t) for s, t, _ in norm}
        for s, t, w in list(norm):
            if (t, s) not in present:
                norm.append((t, s, w))
                present.add((t, s))
    norm.sort(key=lambda e: (e[1], e[0]))
    return GraphStructure(int(n), tuple(norm), bool(directed))


def _offsets(neighborhood):
    if neighborhood == "moore8":
        return [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]
    if neighborhood == "vonneumann4":
        return [(-1, 0), (0, -1), (0, 1), (1, 0)]
    if neighborhood == "chain-horizontal":
        return [(0, -1), (0, 1)]
    raise GraphError(f"unknown neighborhood {neighborhood!r}; expected one of {NEIGHBORHOODS}")


def grid_graph(rows: int, cols: int, neighborhood: str = "moore8", boundary: str = "dead") -> GraphStructure:
    """Cellular grid with node index ``row * cols + col``.

    Toroidal wrapping can map several offsets onto the same neighbor on small
    grids; such repeats collapse to a single edge.
    """
    if rows < 1 or cols < 1:
        raise GraphError(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    if boundary not in BOUNDARIES:
        raise GraphError(f"unknown boundary {boundary!r}; expected one of {BOUNDARIES}")
    offsets = _offsets(neighborhood)
    edges = set()
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            for dr, dc in offsets:
                rr, cc = r + dr, c + dc
                if boundary == "toroidal":
                    rr, cc = rr % rows, cc % cols
                elif not (0 <= rr < rows and 0 <= cc < cols):
                    continue
                j = rr * cols + cc
                if j != i:
                    edges.add((j, i))
    return build_graph(rows * cols, [(s, t, 1.0) for s, t in edges], directed=False)


def chain_graph(n: int) -> GraphStructure:
    """Bidirectional path ``0 - 1 - ... - n-1`` (a token sequence graph)."""
    return grid_graph(1, n, "chain-horizontal", "dead")


def random_graph(n: int, extra_edges: int, seed: int, connected: bool = True,
                 weights: tuple[float, float] | None = None) -> GraphStructure:
    """Seeded undirected random graph.

    With ``connected`` a random spanning tree is laid down first, then
    ``extra_edges`` further distinct edges are sampled.
    """
    rng = np.random.default_rng(seed)
    pairs = set()
    if connected and n > 1:
        order = rng.permutation(n)
        for k in range(1, n):
            a = int(order[k])
            b = int(order[rng.integers(0, k)])
            pairs.add((min(a, b), max(a, b)))
    max_pairs = n * (n - 1) // 2
    target = min(max_pairs, len(pairs) + extra_edges)
    while len(pairs) < target:
        a, b = (int(x) for x in rng.integers(0, n, size=2))
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    pairs = sorted(pairs)
    if weights is None:
        ws = [1.0] * len(pairs)
    else:
        ws = rng.uniform(weights[0], weights[1], size=len(pairs)).tolist()
    return build_graph(n, [(a, b, w) for (a, b), w in zip(pairs, ws)], directed=False)


def shortest_path_lengths(g: GraphStructure) -> np.ndarray:
    """All-pairs hop distances, ``dist[j, i]`` = shortest path ``j -> i`` (BFS).

    Unreachable pairs hold ``-1``.
    """
    n = g.node_count
    out_adj = [[] for _ in range(n)]
    for s, t, _ in g.edges:
        out_adj[s].append(t)
    dist = np.full((n, n), -1, dtype=np.int64)
    for src in range(n):
        row = dist[src]
        row[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in out_adj[u]:
                if row[v] < 0:
                    row[v] = row[u] + 1
                    queue.append(v)
    return dist


def diameter(g: GraphStructure) -> float | int:
    """Longest shortest directed path; ``math.inf`` if not strongly connected."""
    dist = shortest_path_lengths(g)
    if (dist < 0).any():
        return math.inf
    return int(dist.max())


# -- edge-list text format ---------------------------------------------------
# first line "n m directed", then m lines "src dst weight"; '#' starts a comment

def format_edge_list(g: GraphStructure) -> str:
    lines = [f"{g.node_count} {g.edge_count} {int(g.directed)}"]
    lines += [f"{s} {t} {w!r}" for s, t, w in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> GraphStructure:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise GraphError("empty edge list")
    lineno, head = rows[0]
    if len(head) != 3:
        raise GraphError(f"line {lineno}: header must be 'n m directed'")
    try:
        n, m = int(head[0]), int(head[1])
        flag = head[2].lower()
        if flag not in ("0", "1", "true", "false"):
            raise ValueError(flag)
        directed = flag in ("1", "true")
    except ValueError as exc:
        raise GraphError(f"line {lineno}: bad header {' '.join(head)!r}") from exc
    body = rows[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges, found {len(body)}")
    edges = []
    for lineno, parts in body:
        if len(parts) not in (2, 3):
            raise GraphError(f"line {lineno}: expected 'src dst weight'")
        try:
            s, t = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise GraphError(f"line {lineno}: {exc}") from exc
        edges.append((s, t, w))
    return build_graph(n, edges, directed)


def read_edge_list(path) -> GraphStructure:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: GraphStructure, path) -> None:
    Path(path).write_text(format_edge_list(g))
