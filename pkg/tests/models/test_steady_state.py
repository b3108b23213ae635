import attrs
import numpy as np
import pytest

from poisson_filter.exceptions import (
    PoissonFilterModelException,
    PoissonFilterNumericalException,
)
from poisson_filter.models.linear import LinearModel, build_linear_sir, build_linear_sirh
from poisson_filter.models.objects import EpidemiologicalInputs, ModelVariant
from poisson_filter.models.rates import derive_rates
from poisson_filter.models.steady_state import steady_state_closed_form, steady_state_numeric
from tests.conftest import BIRTHS, SIR_STEADY_STATE


def test_sir_closed_form(sir_rates):
    steady = steady_state_closed_form(sir_rates, BIRTHS, ModelVariant.SIR)
    np.testing.assert_allclose(steady.values, SIR_STEADY_STATE, atol=0.01)
    assert [round(v) for v in steady.values] == [121422, 3643, 31152]
    assert steady["I"] == pytest.approx(3642.66, abs=0.01)


def test_sirh_closed_form(sirh_steady_state):
    assert sirh_steady_state.components == ("S", "I", "R", "H")
    assert sirh_steady_state["H"] == pytest.approx(9758.22, abs=0.01)
    assert sirh_steady_state["H"] == pytest.approx(10000, rel=0.2)
    assert sirh_steady_state["R"] == pytest.approx(27637.37, abs=0.01)


def test_zero_births_give_zero_steady_state(sirh_rates):
    steady = steady_state_closed_form(sirh_rates, 0.0, ModelVariant.SIRH)
    np.testing.assert_array_equal(steady.values, np.zeros(4))


def test_no_pih_inflow_gives_no_hydrocephalus(sirh_rates):
    steady = steady_state_closed_form(attrs.evolve(sirh_rates, h=0.0), BIRTHS, ModelVariant.SIRH)
    assert steady["H"] == 0.0


def test_zero_denominator_is_rejected(sirh_rates):
    rates = attrs.evolve(sirh_rates, d_R=0.0, d_H=0.0)
    with pytest.raises(PoissonFilterModelException) as e:
        steady_state_closed_form(rates, BIRTHS, ModelVariant.SIRH)
    assert "d_R + d_H" in e.value.exception_message


def test_closed_form_is_a_fixed_point(sir_rates, sirh_rates):
    for rates, build, variant in (
        (sir_rates, build_linear_sir, ModelVariant.SIR),
        (sirh_rates, build_linear_sirh, ModelVariant.SIRH),
    ):
        model = build(rates, BIRTHS)
        x = steady_state_closed_form(rates, BIRTHS, variant).values
        residual = model.step(x, 1) - x
        assert np.linalg.norm(residual) / np.linalg.norm(x) < 1e-9


def _random_inputs(rng):
    T_S = rng.uniform(10, 40)
    m_1 = rng.uniform(0.01, 0.05)
    return EpidemiologicalInputs(
        T_S=T_S,
        T_i=T_S + rng.uniform(50, 500),
        b=rng.uniform(100, 10000),
        m_1=m_1,
        s=rng.uniform(0.0, 0.3),
        a_raw=rng.uniform(0.03, 0.1),
        m_2=m_1 + rng.uniform(0.005, 0.05),
        p=rng.uniform(0.0, 0.005),
        d_H_frac=rng.uniform(0.0, 1.0),
    )


def test_numeric_matches_closed_form_for_random_inputs():
    rng = np.random.default_rng(2019)
    for _ in range(100):
        inputs = _random_inputs(rng)
        for variant, build in (
            (ModelVariant.SIR, build_linear_sir),
            (ModelVariant.SIRH, build_linear_sirh),
        ):
            rates = derive_rates(inputs, variant)
            closed = steady_state_closed_form(rates, inputs.b, variant)
            numeric = steady_state_numeric(build(rates, inputs.b))
            assert numeric.variant is variant
            np.testing.assert_allclose(numeric.values, closed.values, rtol=1e-9, atol=1e-9)


def test_numeric_trivial_linear_model():
    model = LinearModel(
        F=np.zeros((3, 3)), b=[1.0, 2.0, 3.0], W=np.zeros((3, 3)), B=np.zeros((1, 3))
    )
    steady = steady_state_numeric(model)
    np.testing.assert_allclose(steady.values, [1.0, 2.0, 3.0])


def test_numeric_rejects_unnamed_state_count():
    model = LinearModel(
        F=np.zeros((2, 2)), b=[1.0, 2.0], W=np.zeros((2, 2)), B=np.zeros((1, 2))
    )
    with pytest.raises(PoissonFilterModelException, match="3 or 4 states, got 2"):
        steady_state_numeric(model)


def test_numeric_rejects_unstable_dynamics():
    model = LinearModel(F=np.eye(3), b=np.ones(3), W=np.zeros((3, 3)), B=np.zeros((1, 3)))
    with pytest.raises(PoissonFilterNumericalException) as e:
        steady_state_numeric(model)
    assert "spectral radius" in e.value.exception_message


def test_contagious_fixed_point(contagious_model, sirh_steady_state):
    steady = steady_state_numeric(contagious_model)
    assert steady.variant is ModelVariant.SIRH_CONTAGIOUS
    assert steady["I"] > sirh_steady_state["I"]
    assert steady["S"] < sirh_steady_state["S"]
    x = steady.values
    assert np.linalg.norm(contagious_model.step(x, 1) - x) < 1e-9 * np.linalg.norm(x)


def test_contagious_iteration_budget(contagious_model):
    with pytest.raises(PoissonFilterNumericalException) as e:
        steady_state_numeric(contagious_model, max_iterations=10)
    assert "did not converge" in e.value.exception_message
