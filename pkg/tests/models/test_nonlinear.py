import numpy as np
import pytest

from poisson_filter.exceptions import PoissonFilterModelException
from poisson_filter.models.linear import build_linear_sir, build_linear_sirh
from poisson_filter.models.nonlinear import NonlinearModel, build_contagious_sirh
from poisson_filter.models.objects import ModelVariant
from tests.conftest import BETA, BIRTHS, SIR_STEADY_STATE


def _finite_difference_jacobian(model, x, h=1e-3):
    J = np.empty((model.dim, model.dim))
    for j in range(model.dim):
        e = np.zeros(model.dim)
        e[j] = h
        J[:, j] = (model.step(x + e, 1) - model.step(x - e, 1)) / (2 * h)
    return J


def test_zero_beta_matches_linear_map(sirh_rates):
    model = build_contagious_sirh(sirh_rates, BIRTHS, 0.0)
    linear = build_linear_sirh(sirh_rates, BIRTHS)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.uniform(0, 2e5, size=4)
        np.testing.assert_array_equal(model.step(x, 1), linear.step(x, 1))
        np.testing.assert_array_equal(model.jacobian(x), linear.transition(0))


def test_jacobian_matches_finite_differences(contagious_model):
    rng = np.random.default_rng(11)
    for _ in range(100):
        x = rng.uniform(0, 2e5, size=4)
        J = contagious_model.jacobian(x)
        fd = _finite_difference_jacobian(contagious_model, x)
        assert np.abs(J - fd).max() < 1e-6 * np.linalg.norm(x)


def test_jacobian_at_noncontagious_equilibrium(contagious_model, sirh_steady_state):
    J = contagious_model.jacobian(sirh_steady_state.values)
    assert J[0, 1] == pytest.approx(-BETA * SIR_STEADY_STATE[0], rel=1e-6)
    assert J[0, 1] == pytest.approx(-0.1214, abs=1e-4)
    assert J[1, 1] == pytest.approx(
        contagious_model.base.transition(0)[1, 1] + BETA * sirh_steady_state["S"]
    )


def test_batched_step_and_jacobian(contagious_model):
    x = np.array([[1e5, 3e3, 3e4, 1e4], [5e4, 9e4, 1e5, 2e4]])
    steps = contagious_model.step(x, 1)
    jacobians = contagious_model.jacobian(x)
    assert jacobians.shape == (2, 4, 4)
    for i in range(2):
        np.testing.assert_allclose(steps[i], contagious_model.step(x[i], 1))
        np.testing.assert_array_equal(jacobians[i], contagious_model.jacobian(x[i]))


def test_contagion_moves_susceptibles_to_infected(contagious_model):
    x = np.array([1e5, 1e3, 0.0, 0.0])
    linear = contagious_model.base.step(x, 1)
    out = contagious_model.step(x, 1)
    flux = BETA * 1e5 * 1e3
    assert out[0] == pytest.approx(linear[0] - flux)
    assert out[1] == pytest.approx(linear[1] + flux)
    np.testing.assert_array_equal(out[2:], linear[2:])


def test_delegates_to_base(contagious_model):
    assert contagious_model.variant is ModelVariant.SIRH_CONTAGIOUS
    assert contagious_model.components == ("S", "I", "R", "H")
    np.testing.assert_array_equal(
        contagious_model.observation(0), contagious_model.base.observation(0)
    )
    scaled = contagious_model.scaled_noise(2.0)
    assert isinstance(scaled, NonlinearModel)
    assert scaled.beta == BETA
    np.testing.assert_array_equal(scaled.noise(0), 2.0 * contagious_model.noise(0))


def test_rejects_negative_beta_and_three_states(sirh_rates, sir_rates):
    with pytest.raises(PoissonFilterModelException):
        build_contagious_sirh(sirh_rates, BIRTHS, -1e-6)
    with pytest.raises(PoissonFilterModelException):
        NonlinearModel(base=build_linear_sir(sir_rates, BIRTHS), beta=BETA)
