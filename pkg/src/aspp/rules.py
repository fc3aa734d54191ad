"""Local update rules.

A rule maps ``(own state, neighbor states, neighbor view)`` to the node's next
state. Neighbor states arrive as a ``(k, d)`` array ordered by ascending source
index; the view carries the node index, source indices and edge weights.

Rules may also provide a whole-configuration ``batch`` callable. The engine
uses it when available; it must agree with the per-node path (bit-for-bit for
integer-valued rules, within 1e-12 otherwise).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import sparse

from .errors import DomainError, ValidationError
from .graph import GraphStructure, NeighborView

__all__ = [
    "UpdateRule",
    "AffineBlock",
    "MpnnFunctions",
    "ColoringRuleConfig",
    "identity_rule",
    "life_rule",
    "linear_contraction_rule",
    "mpnn_rule",
    "coloring_rule",
    "position_bias",
    "format_mpnn",
    "parse_mpnn",
    "save_mpnn",
    "load_mpnn",
]

LocalFn = Callable[[np.ndarray, np.ndarray, NeighborView], np.ndarray]
BatchFn = Callable[[np.ndarray, GraphStructure], np.ndarray]


@dataclass(frozen=True)
class UpdateRule:
    dim: int
    local: LocalFn
    lipschitz: float | None = None
    batch: BatchFn | None = None
    name: str = "rule"

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"state dimension must be >= 1, got {self.dim}")

    def __call__(self, own, neighbors=(), weights=None, *, node=0, sources=None):
        """Apply the rule to a single node outside the engine."""
        own = np.asarray(own, dtype=float)
        nbrs = np.asarray(neighbors, dtype=float).reshape(-1, self.dim)
        k = len(nbrs)
        if sources is None:
            sources = np.arange(k)
        if weights is None:
            weights = np.ones(k)
        view = NeighborView(node, np.asarray(sources), np.asarray(weights, dtype=float))
        return self.local(own, nbrs, view)


def identity_rule(d: int) -> UpdateRule:
    def local(own, nbrs, view):
        return own.copy()

    def batch(H, g):
        return H.copy()

    return UpdateRule(d, local, lipschitz=1.0, batch=batch, name="identity")


# -- Game of Life ---------------------------------------------------------------

_LIFE_TOL = 1e-6


def _check_binary(x, what):
    x = np.asarray(x)
    bad = np.abs(x - np.round(x)) > _LIFE_TOL
    bad |= (np.round(x) != 0) & (np.round(x) != 1)
    if bad.any():
        raise DomainError(f"{what} outside {{0, 1}}: {x[bad].ravel()[:4].tolist()}")


def _life_table(own, count):
    return np.where((count == 3) | ((own == 1) & (count == 2)), 1.0, 0.0)


def life_rule() -> UpdateRule:
    """Conway's B3/S23 rule on 0/1 scalar states."""

    def local(own, nbrs, view):
        _check_binary(own, "own state")
        _check_binary(nbrs, f"neighbor state of node {view.node}")
        count = round(float(nbrs.sum()))
        return _life_table(np.round(own), count).reshape(1)

    def batch(H, g):
        _check_binary(H, "life state")
        cells = np.round(H)
        counts = np.round(g.adjacency(weighted=False) @ cells)
        return _life_table(cells, counts)

    return UpdateRule(1, local, lipschitz=None, batch=batch, name="life")


# -- anchored contraction --------------------------------------------------------

def linear_contraction_rule(d: int, alpha: float, anchor) -> UpdateRule:
    """``phi(h, N) = anchor + alpha * mean({h} | N)``.

    Each output coordinate is ``alpha`` times a convex combination of inputs
    plus a constant, so the sup-metric Lipschitz constant is exactly ``alpha``.
    The unique fixed point is the constant configuration ``anchor / (1 - alpha)``.
    """
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    anchor = np.asarray(anchor, dtype=float).ravel()
    if anchor.size == 0 or anchor.size != d:
        raise ValidationError(f"anchor must have length d={d}, got {anchor.size}")
    anchor.setflags(write=False)

    def local(own, nbrs, view):
        total = own.copy()
        for row in nbrs:
            total = total + row
        return anchor + alpha * (total / (len(nbrs) + 1))

    def batch(H, g):
        a = g.adjacency(weighted=False)
        deg = g.in_degree()
        return anchor + alpha * ((H + a @ H) / (deg + 1)[:, None])

    return UpdateRule(d, local, lipschitz=float(alpha), batch=batch, name=f"contraction(alpha={alpha})")


# -- message passing ------------------------------------------------------------

_ACTIVATIONS = {
    "identity": lambda x: x,
    "relu": lambda x: np.maximum(x, 0.0),
    "tanh": np.tanh,
}


@dataclass(frozen=True, eq=False)
class AffineBlock:
    """``act(w_first @ x + w_second @ y + bias)``."""

    w_first: np.ndarray
    w_second: np.ndarray
    bias: np.ndarray
    activation: str = "identity"

    def __post_init__(self):
        if self.activation not in _ACTIVATIONS:
            raise ValidationError(f"unknown nonlinearity {self.activation!r}")
        for name in ("w_first", "w_second", "bias"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        d = self.bias.shape[0]
        if self.bias.shape != (d,) or self.w_first.shape != (d, d) or self.w_second.shape != (d, d):
            raise ValidationError(
                f"inconsistent block shapes {self.w_first.shape}, {self.w_second.shape}, {self.bias.shape}"
            )

    @property
    def dim(self) -> int:
        return self.bias.shape[0]

    def __call__(self, x, y):
        if x.shape != (self.dim,) or y.shape != (self.dim,):
            raise DomainError(f"block expects vectors of length {self.dim}, got {x.shape} and {y.shape}")
        return _ACTIVATIONS[self.activation](self.w_first @ x + self.w_second @ y + self.bias)

    def __eq__(self, other):
        if not isinstance(other, AffineBlock):
            return NotImplemented
        return (
            self.activation == other.activation
            and np.array_equal(self.w_first, other.w_first)
            and np.array_equal(self.w_second, other.w_second)
            and np.array_equal(self.bias, other.bias)
        )


@dataclass(frozen=True)
class MpnnFunctions:
    """Message ``M(h_i, h_j)`` and update ``U(h_i, m_i)`` of one MPNN layer."""

    message: AffineBlock
    update: AffineBlock

    def __post_init__(self):
        if self.message.dim != self.update.dim:
            raise ValidationError("message and update blocks disagree on d")

    @property
    def dim(self) -> int:
        return self.message.dim

    @classmethod
    def random(cls, d: int, seed: int, activation: str = "tanh", scale: float = 0.5) -> MpnnFunctions:
        rng = np.random.default_rng(seed)

        def block():
            return AffineBlock(
                rng.normal(0, scale, (d, d)), rng.normal(0, scale, (d, d)), rng.normal(0, scale, d), activation
            )

        return cls(block(), block())

    @classmethod
    def summing(cls, d: int) -> MpnnFunctions:
        """``M(x, y) = x + y`` and ``U(x, m) = x + m``: monotone in every input."""
        eye, zero = np.eye(d), np.zeros(d)
        return cls(AffineBlock(eye, eye, zero), AffineBlock(eye, eye, zero))


def mpnn_rule(fns: MpnnFunctions) -> UpdateRule:
    """One MPNN layer as a local rule: ``U(h_i, sum_j M(h_i, h_j))``.

    The aggregate is accumulated left to right over ascending source index,
    starting from the zero vector.
    """
    d = fns.dim

    def local(own, nbrs, view):
        agg = np.zeros(d)
        for row in nbrs:
            agg = agg + fns.message(own, row)
        return fns.update(own, agg)

    return UpdateRule(d, local, name="mpnn")


# -- 3-coloring -----------------------------------------------------------------

_MASK64 = (1 << 64) - 1
POSITION_BIAS_SCALE = 0.01
CLAMP = 10.0


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@lru_cache(maxsize=4096)
def _position_bias(node: int, d: int) -> tuple[float, ...]:
    out, state = [], node
    for _ in range(d):
        state = _splitmix64(state)
        u = (state >> 11) / float(1 << 53)
        out.append((2.0 * u - 1.0) * POSITION_BIAS_SCALE)
    return tuple(out)


def position_bias(node: int, d: int = 3) -> np.ndarray:
    """Fixed per-node bias vector, entries in ``[-0.01, 0.01)``."""
    return np.array(_position_bias(int(node), d))


@dataclass(frozen=True)
class ColoringRuleConfig:
    use_edge_weights: bool = True
    use_position_encoding: bool = True
    bidirectional: bool = True
    step_size: float = 0.5

    def __post_init__(self):
        if not 0 < self.step_size <= 1:
            raise ValidationError(f"step size must lie in (0, 1], got {self.step_size}")


def _softmax(x, axis=-1):
    z = np.exp(x - x.max(axis=axis, keepdims=True))
    return z / z.sum(axis=axis, keepdims=True)


def coloring_rule(cfg: ColoringRuleConfig = ColoringRuleConfig()) -> UpdateRule:
    """Softmax-pressure descent on three color scores.

    Each neighbor pushes against the colors it currently prefers:
    ``p = sum_j w_j softmax(h_j)``. The pressure is centered across channels
    before the step so only relative preferences move, then scores are clamped
    to ``[-10, 10]``. Without ``bidirectional`` a node listens only to
    lower-indexed neighbors.
    """
    eta = cfg.step_size

    def local(own, nbrs, view):
        keep = np.ones(len(view), dtype=bool) if cfg.bidirectional else view.sources < view.node
        w = view.weights if cfg.use_edge_weights else np.ones(len(view))
        p = np.zeros(3)
        for row, wj, k in zip(nbrs, w, keep):
            if k:
                p = p + wj * _softmax(row)
        new = own - eta * (p - p.mean())
        if cfg.use_position_encoding:
            new = new + position_bias(view.node)
        return np.clip(new, -CLAMP, CLAMP)

    def batch(H, g):
        a = g.adjacency(weighted=cfg.use_edge_weights)
        if not cfg.bidirectional:
            a = sparse.tril(a, k=-1, format="csr")
        p = a @ _softmax(H, axis=1)
        new = H - eta * (p - p.mean(axis=1, keepdims=True))
        if cfg.use_position_encoding:
            new = new + np.array([_position_bias(i, 3) for i in range(len(H))])
        return np.clip(new, -CLAMP, CLAMP)

    return UpdateRule(3, local, batch=batch, name="coloring")


# -- MPNN parameter files -------------------------------------------------------
# "mpnn <d>", then per function a tag line "<name> <nonlinearity>" followed by
# d rows of w_first, d rows of w_second and one bias row.

def format_mpnn(fns: MpnnFunctions) -> str:
    lines = [f"mpnn {fns.dim}"]
    for name, block in (("message", fns.message), ("update", fns.update)):
        lines.append(f"{name} {block.activation}")
        for mat in (block.w_first, block.w_second):
            lines += [" ".join(f"{v:.17g}" for v in row) for row in mat]
        lines.append(" ".join(f"{v:.17g}" for v in block.bias))
    return "\n".join(lines) + "\n"


def parse_mpnn(text: str) -> MpnnFunctions:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or rows[0][0] != "mpnn" or len(rows[0]) != 2:
        raise ValidationError("parameter file must start with 'mpnn <d>'")
    d = int(rows[0][1])
    per_block = 2 * d + 2
    if len(rows) != 1 + 2 * per_block:
        raise ValidationError(f"expected {1 + 2 * per_block} non-empty lines for d={d}, got {len(rows)}")
    blocks = {}
    for k in range(2):
        chunk = rows[1 + k * per_block: 1 + (k + 1) * per_block]
        name, act = chunk[0]
        nums = [[float(v) for v in r] for r in chunk[1:]]
        if any(len(r) != d for r in nums):
            raise ValidationError(f"block {name!r}: every row needs {d} entries")
        blocks[name] = AffineBlock(np.array(nums[:d]), np.array(nums[d:2 * d]), np.array(nums[2 * d]), act)
    if set(blocks) != {"message", "update"}:
        raise ValidationError(f"expected message and update blocks, got {sorted(blocks)}")
    return MpnnFunctions(blocks["message"], blocks["update"])


def save_mpnn(fns: MpnnFunctions, path) -> None:
    Path(path).write_text(format_mpnn(fns))


def load_mpnn(path) -> MpnnFunctions:
    return parse_mpnn(Path(path).read_text())
