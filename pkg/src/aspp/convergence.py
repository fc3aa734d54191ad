"""Empirical checks of contraction-driven convergence.

Three measurements: a sampled estimate of the one-step contraction
coefficient, a fixed-point uniqueness test over random starts, and a fit of
the geometric decay rate towards a known fixed point.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .engine import (
    DEFAULT_TOL,
    EvolutionTrace,
    StateConfiguration,
    evolve_to_fixed_point,
    step,
    sup_distance,
)
from .errors import ValidationError
from .graph import GraphStructure
from .rules import UpdateRule

__all__ = [
    "EstimationError",
    "FitError",
    "ContractionReport",
    "UniquenessReport",
    "DecayFit",
    "estimate_contraction",
    "fixed_point_uniqueness",
    "fit_decay",
    "calibrated_amplitude",
    "predicted_steps",
    "distances_csv",
]

DEGENERATE_DISTANCE = 1e-12


class EstimationError(ValidationError):
    pass


class FitError(ValidationError):
    pass


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ContractionReport:
    estimated_c: float
    samples: int
    seed: int
    max_ratio_pair_distance: float

    def to_json(self) -> str:
        return _json(asdict(self))


@dataclass(frozen=True)
class UniquenessReport:
    unique: bool
    max_pairwise_distance: float
    mean_steps: float
    steps: tuple[int, ...] = ()
    converged: tuple[bool, ...] = ()
    fixed_point: StateConfiguration | None = field(default=None, compare=False)

    def __iter__(self):
        # unpacks as (unique, max_pairwise_distance, mean_steps)
        return iter((self.unique, self.max_pairwise_distance, self.mean_steps))

    def to_json(self) -> str:
        d = {
            "unique": self.unique,
            "max_pairwise_distance": self.max_pairwise_distance,
            "mean_steps": self.mean_steps,
            "steps": list(self.steps),
            "converged": list(self.converged),
        }
        return _json(d)


@dataclass(frozen=True)
class DecayFit:
    ratios: tuple[float, ...]
    rate: float
    residual: float

    def to_json(self) -> str:
        return _json({"rate": self.rate, "residual": self.residual, "ratios": list(self.ratios)})


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def estimate_contraction(rule: UpdateRule, g: GraphStructure, trials: int = 10_000,
                         amplitude: float = 1.0, seed: int = 0) -> ContractionReport:
    """Largest observed ``d(*H, *H') / d(H, H')`` over random configuration pairs.

    Pair ``t`` is drawn from a generator seeded with ``(seed, t)``, so the
    estimate does not depend on how trials are scheduled.
    """
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not amplitude > 0:
        raise ValidationError(f"amplitude must be positive, got {amplitude}")
    shape = (g.node_count, rule.dim)
    best, best_dist, used = -1.0, 0.0, 0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        a = StateConfiguration(rng.uniform(-amplitude, amplitude, shape))
        b = StateConfiguration(rng.uniform(-amplitude, amplitude, shape))
        din = sup_distance(a, b)
        if din < DEGENERATE_DISTANCE:
            continue
        used += 1
        ratio = sup_distance(step(a, g, rule), step(b, g, rule)) / din
        if ratio > best:
            best, best_dist = ratio, din
    if used == 0:
        raise EstimationError("every sampled pair was degenerate (input distance < 1e-12)")
    return ContractionReport(float(best), used, int(seed), float(best_dist))


def fixed_point_uniqueness(rule: UpdateRule, g: GraphStructure, n_inits: int = 10,
                           amplitude: float = 1.0, tol: float = DEFAULT_TOL,
                           max_steps: int = 1000, seed: int = 0,
                           center: float = 0.0) -> UniquenessReport:
    """Run to a fixed point from ``n_inits`` random starts and compare the results.

    Starts are uniform in ``center +/- amplitude``. The fixed point is called
    unique when every run converged and all results lie within ``10 * tol`` of
    each other. Non-convergence is reported, not raised.
    """
    if n_inits < 2:
        raise ValidationError(f"n_inits must be >= 2, got {n_inits}")
    shape = (g.node_count, rule.dim)
    finals, steps, conv = [], [], []
    for k in range(n_inits):
        rng = _trial_rng(seed, k)
        H0 = StateConfiguration(center + rng.uniform(-amplitude, amplitude, shape))
        res = evolve_to_fixed_point(H0, g, rule, tol=tol, max_steps=max_steps)
        finals.append(res.state)
        steps.append(res.steps)
        conv.append(res.converged)
    spread = max(sup_distance(a, b) for a, b in itertools.combinations(finals, 2))
    unique = all(conv) and spread <= 10 * tol
    return UniquenessReport(
        unique=bool(unique),
        max_pairwise_distance=float(spread),
        mean_steps=float(np.mean(steps)),
        steps=tuple(steps),
        converged=tuple(conv),
        fixed_point=finals[0] if unique else None,
    )


def fit_decay(trace: EvolutionTrace, fixed_point: StateConfiguration,
              tol: float = DEFAULT_TOL) -> DecayFit:
    """Geometric rate of approach to ``fixed_point`` along a full trace.

    Ratios ``d(H_{t+1}, H*) / d(H_t, H*)`` are kept while ``d(H_t, H*)`` and
    ``d(H_{t+1}, H*)`` both exceed ``10 * tol``; the rate is their geometric
    mean.
    """
    if len(trace.states) != trace.steps + 1:
        raise FitError("decay fitting needs a trace captured with mode 'all'")
    dist = [sup_distance(H, fixed_point) for H in trace.states]
    floor = 10 * tol
    ratios = []
    for a, b in zip(dist, dist[1:]):
        if a <= floor or b <= floor:
            break
        ratios.append(b / a)
    if len(ratios) < 2:
        raise FitError(f"only {len(ratios)} usable decay ratios (need 2)")
    rate = math.exp(float(np.mean(np.log(ratios))))
    residual = max(abs(r - rate) for r in ratios)
    return DecayFit(tuple(ratios), rate, residual)


def predicted_steps(alpha: float, tol: float, dist0: float) -> int:
    """Step count for a scalar anchored contraction started ``dist0`` from its fixed point.

    The increment at step ``t`` is ``alpha**t * (1 - alpha) * dist0``; the
    solver stops after the first increment at or below ``tol``.
    """
    first = (1 - alpha) * dist0
    if first <= tol:
        return 1
    return math.ceil(math.log(tol / first) / math.log(alpha)) + 1


def calibrated_amplitude(alpha: float, tol: float, target_steps: int, uniform: bool = False) -> float:
    """Initial distance whose scalar run stops after ``target_steps`` steps.

    Returns the geometric midpoint of the interval of distances that map to
    ``target_steps`` under :func:`predicted_steps`. With ``uniform=True`` the
    result is instead the half-width ``A`` of a uniform start ``U(-A, A)``
    whose expected log-distance, ``ln A - 1``, lands on that midpoint.
    """
    amp = tol / ((1 - alpha) * alpha ** (target_steps - 1.5))
    return amp * math.e if uniform else amp


def distances_csv(trace: EvolutionTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "distance"])
    for t, d in enumerate(trace.step_distances):
        w.writerow([t, repr(d)])
    return buf.getvalue()
