import logging

import numpy as np
import pytest

from poisson_filter.exceptions import (
    PoissonFilterModelException,
    PoissonFilterNumericalException,
    PoissonFilterSimulationException,
)
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.objects import ModelVariant
from poisson_filter.models.steady_state import steady_state_closed_form
from poisson_filter.simulate.objects import Scenario
from poisson_filter.simulate.rng import make_generator
from poisson_filter.simulate.simulator import (
    noise_factor,
    run_scenario,
    sample_poisson,
    step_truth,
)
from tests.conftest import BIRTHS, SIR_STEADY_STATE, T_S

N_DRAWS = 10**6


def test_noise_free_step_at_steady_state(sirh_model, sirh_steady_state):
    quiet = sirh_model.with_noise(np.zeros((4, 4)))
    x = step_truth(sirh_steady_state.values, quiet, make_generator(1), step=1)
    np.testing.assert_allclose(x, sirh_steady_state.values, rtol=1e-12)


def test_noise_free_sir_converges_from_zero(sir_model, sir_rates):
    scenario = Scenario(
        model=sir_model.with_noise(np.zeros((3, 3))), initial_state=np.zeros(3), n_steps=7300
    )
    truth = run_scenario(scenario).truth
    steady = steady_state_closed_form(sir_rates, BIRTHS, ModelVariant.SIR).values
    np.testing.assert_allclose(truth[3650], SIR_STEADY_STATE, rtol=1e-3)
    np.testing.assert_allclose(truth[-1], steady, rtol=1e-6)
    # S and I settle long before R
    assert abs(truth[365, 1] - steady[1]) < abs(truth[365, 2] - steady[2])


def test_large_negative_noise_is_clamped():
    model = LinearModel(F=np.eye(2), b=np.zeros(2), W=1e6 * np.eye(2), B=np.ones((1, 2)))
    rng = make_generator(3)
    for k in range(1, 200):
        assert (step_truth(np.array([1.0, 1.0]), model, rng, step=k) >= 0).all()


def test_noise_multiplier_scales_the_draw(sirh_model, sirh_steady_state):
    x0 = sirh_steady_state.values
    mean = sirh_model.step(x0, 1)
    base = step_truth(x0, sirh_model, make_generator(5), step=1, noise_multiplier=1e-6)
    quad = step_truth(x0, sirh_model, make_generator(5), step=1, noise_multiplier=4e-6)
    np.testing.assert_allclose(quad - mean, 2 * (base - mean), rtol=1e-9)


def test_noise_factor_cholesky():
    W = np.array([[4.0, 2.0], [2.0, 3.0]])
    L = noise_factor(W)
    np.testing.assert_allclose(L @ L.T, W)
    assert L[0, 1] == 0.0


def test_noise_factor_singular_diagonal():
    W = np.diag([4.0, 0.0, 9.0])
    np.testing.assert_array_equal(noise_factor(W), np.diag([2.0, 0.0, 3.0]))


def test_noise_factor_singular_full(caplog):
    v = np.array([[1.0], [2.0], [2.0]])
    W = v @ v.T
    with caplog.at_level(logging.WARNING):
        L = noise_factor(W)
    np.testing.assert_allclose(L @ L.T, W, atol=1e-12)
    assert "eigen factor" in caplog.text


def test_noise_factor_rejects_indefinite():
    with pytest.raises(PoissonFilterNumericalException):
        noise_factor(np.array([[1.0, 3.0], [3.0, 1.0]]))
    with pytest.raises(PoissonFilterNumericalException):
        noise_factor(np.diag([1.0, -1.0]))


def test_sample_poisson_zero_rate():
    obs = sample_poisson(np.zeros(1000), make_generator(0), step=4)
    assert not obs.counts.any()
    assert obs.step == 4


@pytest.mark.parametrize("rates", [[-1.0], [np.nan], [np.inf]])
def test_sample_poisson_rejects_bad_rates(rates):
    with pytest.raises(PoissonFilterSimulationException):
        sample_poisson(np.array(rates), make_generator(0))


def test_poisson_moments_at_equilibrium_infected_rate():
    lam = 0.2 / T_S * SIR_STEADY_STATE[1]
    assert lam == pytest.approx(26.019, abs=1e-3)
    counts = sample_poisson(np.full(N_DRAWS, lam), make_generator(11)).counts
    assert counts.mean() == pytest.approx(lam, rel=0.005)
    assert counts.var() == pytest.approx(lam, rel=0.01)


@pytest.mark.parametrize("lam", [0.1, 1.0, 10.0, 1000.0])
def test_poisson_moments(lam):
    counts = sample_poisson(np.full(N_DRAWS, lam), make_generator(17, int(lam * 10))).counts
    mean_se = np.sqrt(lam / N_DRAWS)
    var_se = np.sqrt((lam + 2 * lam**2) / N_DRAWS)
    assert abs(counts.mean() - lam) < 4 * mean_se
    assert abs(counts.var(ddof=1) - lam) < 4 * var_se


def test_rate_and_poisson_noise_are_uncorrelated():
    rng = make_generator(23)
    lam = rng.uniform(1, 100, size=N_DRAWS)
    z = sample_poisson(lam, rng).counts
    product = (lam - lam.mean()) * (z - lam)
    assert abs(product.mean()) < 4 * product.std(ddof=1) / np.sqrt(N_DRAWS)


def test_empty_scenario_holds_only_the_initial_state(sirh_model, sirh_steady_state):
    trajectory = run_scenario(
        Scenario(model=sirh_model, initial_state=sirh_steady_state.values, n_steps=0)
    )
    assert trajectory.n_steps == 0
    assert trajectory.truth.shape == (1, 4)
    np.testing.assert_array_equal(trajectory.truth[0], sirh_steady_state.values)
    assert len(trajectory.observations) == 1


def test_same_seed_same_trajectory(sirh_model, sirh_steady_state):
    def simulate(seed, trial):
        return run_scenario(
            Scenario(
                model=sirh_model,
                initial_state=sirh_steady_state.values,
                n_steps=300,
                seed=seed,
                trial=trial,
            )
        )

    first, second = simulate(99, 0), simulate(99, 0)
    np.testing.assert_array_equal(first.truth, second.truth)
    np.testing.assert_array_equal(first.counts, second.counts)
    assert first.digest() == second.digest()
    assert simulate(99, 1).digest() != first.digest()
    assert simulate(100, 0).digest() != first.digest()


def test_trajectory_invariants(sirh_model, sirh_steady_state):
    trajectory = run_scenario(
        Scenario(model=sirh_model, initial_state=sirh_steady_state.values, n_steps=500, seed=1)
    )
    assert (trajectory.truth >= 0).all()
    assert (trajectory.counts >= 0).all()
    assert trajectory.counts.dtype == np.int64
    np.testing.assert_allclose(trajectory.rates, trajectory.truth @ sirh_model.observation(0).T)
    assert trajectory.components == ("S", "I", "R", "H")
    assert trajectory.observed == ("I", "H")
    assert trajectory.meta == {"scenario": "scenario", "noise_multiplier": 1.0, "trial": 0}
    assert [o.step for o in trajectory.observations] == list(range(501))


def test_contagion_raises_infections(contagious_model, sirh_steady_state):
    trajectory = run_scenario(
        Scenario(
            model=contagious_model,
            initial_state=sirh_steady_state.values,
            n_steps=1000,
            seed=2019,
            name="contagious",
        )
    )
    final_fifth = trajectory.truth[-200:, 1]
    assert final_fifth.mean() > sirh_steady_state["I"]


def test_scenario_validation(sirh_model):
    with pytest.raises(PoissonFilterModelException):
        Scenario(model=sirh_model, initial_state=np.zeros(3), n_steps=1)
    with pytest.raises(ValueError):
        Scenario(model=sirh_model, initial_state=np.zeros(4), n_steps=-1)
    with pytest.raises(ValueError):
        Scenario(model=sirh_model, initial_state=np.zeros(4), n_steps=1, noise_multiplier=-1.0)
