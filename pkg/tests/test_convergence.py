import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspp.convergence import (
    EstimationError,
    FitError,
    calibrated_amplitude,
    distances_csv,
    estimate_contraction,
    fit_decay,
    fixed_point_uniqueness,
    predicted_steps,
)
from aspp.engine import StateConfiguration, evolve, evolve_to_fixed_point
from aspp.graph import random_graph
from aspp.rules import identity_rule, linear_contraction_rule


def test_identity_ratio_is_one(path4):
    assert estimate_contraction(identity_rule(1), path4, trials=200).estimated_c == 1.0


def test_sparse_random_graph_estimate_near_alpha():
    g = random_graph(10, 5, seed=0)
    c = estimate_contraction(linear_contraction_rule(1, 0.76, [0.0]), g, trials=10_000, seed=0).estimated_c
    assert 0.70 <= c <= 0.76 + 1e-9


def test_isolated_node_ratio_exact(isolated):
    c = estimate_contraction(linear_contraction_rule(1, 0.5, [0.0]), isolated, trials=100).estimated_c
    assert abs(c - 0.5) <= 1e-9


def test_all_degenerate_pairs(isolated):
    with pytest.raises(EstimationError):
        estimate_contraction(identity_rule(1), isolated, trials=10, amplitude=1e-14)


def test_report_json_is_seed_deterministic(path4):
    r = linear_contraction_rule(1, 0.3, [0.0])
    a = estimate_contraction(r, path4, trials=300, seed=4)
    b = estimate_contraction(r, path4, trials=300, seed=4)
    assert a.to_json() == b.to_json()
    assert json.loads(a.to_json())["samples"] == 300


def test_uniqueness_closed_form_fixed_point(isolated):
    rep = fixed_point_uniqueness(linear_contraction_rule(1, 0.76, [1.0]), isolated, n_inits=10, amplitude=5.0)
    assert rep.unique
    assert abs(rep.fixed_point.values[0, 0] - 1 / 0.24) <= 1e-5


def test_identity_has_no_unique_fixed_point(isolated):
    unique, spread, _ = fixed_point_uniqueness(identity_rule(1), isolated, n_inits=2)
    assert not unique and spread > 0


def test_uniqueness_on_random_graph():
    rep = fixed_point_uniqueness(linear_contraction_rule(1, 0.5, [0.2]), random_graph(20, 10, seed=1), n_inits=8)
    assert rep.unique and all(rep.converged)


def test_uniqueness_reports_non_convergence(isolated):
    rep = fixed_point_uniqueness(linear_contraction_rule(1, 0.99, [0.0]), isolated, n_inits=3, max_steps=5)
    assert not rep.unique
    assert rep.converged == (False, False, False)


def test_uniqueness_seed_deterministic(path4):
    r = linear_contraction_rule(1, 0.6, [0.0])
    assert fixed_point_uniqueness(r, path4, seed=3) == fixed_point_uniqueness(r, path4, seed=3)


def _isolated_trace(alpha, isolated, steps=40):
    r = linear_contraction_rule(1, alpha, [0.0])
    return evolve(StateConfiguration([[1.0]]), isolated, r, steps)


@pytest.mark.parametrize("alpha", [0.76, 0.5])
def test_decay_exactly_geometric_on_isolated_node(alpha, isolated):
    fit = fit_decay(_isolated_trace(alpha, isolated), StateConfiguration([[0.0]]))
    assert abs(fit.rate - alpha) <= 1e-6
    assert fit.residual <= 1e-6


def test_decay_of_identity_fails(isolated):
    trace = evolve(StateConfiguration([[1.0]]), isolated, identity_rule(1), 10)
    with pytest.raises(FitError):
        fit_decay(trace, StateConfiguration([[1.0]]))


def test_decay_needs_full_trace(isolated):
    r = linear_contraction_rule(1, 0.5, [0.0])
    trace = evolve(StateConfiguration([[1.0]]), isolated, r, 10, capture="endpoints")
    with pytest.raises(FitError):
        fit_decay(trace, StateConfiguration([[0.0]]))


def test_distances_csv(isolated):
    rows = list(csv.reader(io.StringIO(distances_csv(_isolated_trace(0.5, isolated, 3)))))
    assert rows[0] == ["step", "distance"]
    assert [float(r[1]) for r in rows[1:]] == [0.5, 0.25, 0.125]


@settings(max_examples=80, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(1e-3, 1e3))
def test_predicted_steps_match_iteration(alpha, dist0):
    from aspp.graph import build_graph

    tol = 1e-6
    res = evolve_to_fixed_point(StateConfiguration([[dist0]]), build_graph(1, []),
                                linear_contraction_rule(1, alpha, [0.0]), tol=tol, max_steps=10_000)
    # floating rounding can move a boundary case by one step
    assert abs(res.steps - predicted_steps(alpha, tol, dist0)) <= 1


@pytest.mark.parametrize("target", [5, 15, 30])
def test_calibrated_amplitude_hits_target(target):
    assert predicted_steps(0.76, 1e-6, calibrated_amplitude(0.76, 1e-6, target)) == target


def test_uniform_calibration_scales_by_e():
    base = calibrated_amplitude(0.76, 1e-6, 15)
    assert calibrated_amplitude(0.76, 1e-6, 15, uniform=True) == pytest.approx(base * np.e)
