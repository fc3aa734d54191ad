import numpy as np
import pytest

from aspp.distill import (
    MAX_PARAMS,
    affine_blend_rule,
    distill_demo,
    distill_loss,
    identity_params,
    numerical_gradient,
    param_count,
    project,
    synthetic_teacher,
)
from aspp.engine import StateConfiguration, evolve
from aspp.errors import NumericError, ValidationError
from aspp.graph import chain_graph
from aspp.rules import identity_rule


def test_identity_projection(rng):
    E = rng.normal(size=(5, 4))
    assert np.array_equal(project(E, np.eye(4)).values, E)


def test_zero_projection(rng):
    assert not project(rng.normal(size=(5, 4)), np.zeros((4, 2))).values.any()


def test_projection_orientation():
    W = np.array([[1, 0], [0, 2]]).T
    assert project([[1, 2]], W).values.tolist() == [[1, 4]]


def test_projection_shape_mismatch():
    with pytest.raises(ValidationError):
        project(np.ones((3, 4)), np.ones((3, 2)))


def test_loss_identities(rng):
    a = StateConfiguration(rng.normal(size=(4, 3)))
    b = StateConfiguration(rng.normal(size=(4, 3)))
    assert distill_loss(a, a) == 0.0
    assert distill_loss(a, b) == distill_loss(b, a)
    assert distill_loss(StateConfiguration([[3.0]]), StateConfiguration([[1.0]])) == 4.0
    with pytest.raises(ValidationError):
        distill_loss(a, StateConfiguration.zeros(4, 2))


@pytest.mark.parametrize("K", [0, 1, 5])
def test_identity_engine_has_zero_loss(K, rng):
    target = project(rng.normal(size=(6, 8)), rng.normal(size=(8, 3)))
    final = evolve(target, chain_graph(6), identity_rule(3), K).final
    assert distill_loss(final, target) == 0.0


def test_identity_params_fix_every_state(rng):
    H = StateConfiguration(rng.normal(size=(6, 3)))
    assert np.array_equal(evolve(H, chain_graph(6), affine_blend_rule(identity_params(3), 3), 3).final.values,
                          H.values)


def test_param_limits():
    assert param_count(4) == 21
    with pytest.raises(ValidationError):
        affine_blend_rule(np.zeros(5), 4)
    with pytest.raises(ValidationError):
        affine_blend_rule(np.zeros(param_count(8)), 8)
    assert param_count(7) <= MAX_PARAMS


def test_numerical_gradient_of_quadratic():
    grad = numerical_gradient(lambda t: float(t @ t), np.array([1.0, -2.0, 0.5]))
    np.testing.assert_allclose(grad, [2.0, -4.0, 1.0], rtol=1e-8)


def test_teacher_at_fixed_point_gives_flat_curve():
    E = synthetic_teacher(6, 8, 1)
    res = distill_demo(E, rule_params=identity_params(4), iters=5)
    # central differences at the optimum leave only rounding noise
    assert res.losses[0] == 0.0
    assert max(res.losses) <= 1e-15
    assert max(res.grad_norms) <= 1e-8


def test_zero_step_size_is_flat():
    res = distill_demo(synthetic_teacher(), iters=4, step_size=0.0)
    assert len(set(res.losses)) == 1


def test_demo_halves_loss():
    res = distill_demo(synthetic_teacher(8, 16, 0), iters=200, seed=0)
    assert len(res.losses) == 201
    assert res.losses[-1] <= 0.5 * res.losses[0]


def test_divergence_aborts_with_diagnostics():
    params = identity_params(4) * 1e3
    with pytest.raises(NumericError, match="iteration 0"):
        distill_demo(synthetic_teacher(), rule_params=params, K=200, iters=2)


def test_csv_has_one_row_per_loss():
    res = distill_demo(synthetic_teacher(), iters=3)
    lines = res.to_csv().splitlines()
    assert lines[0] == "iteration,loss,grad_norm" and len(lines) == 5
