import numpy as np
import pytest

from poisson_filter.models.linear import build_linear_sir, build_linear_sirh, observation_matrix
from poisson_filter.models.nonlinear import build_contagious_sirh
from poisson_filter.models.objects import EpidemiologicalInputs, ModelVariant
from poisson_filter.models.rates import derive_rates
from poisson_filter.models.steady_state import steady_state_closed_form

T_S = 28.0
T_I = 365.0
T_R = T_I - T_S
BIRTHS = 4562.0
SIR_STEADY_STATE = (121422.05, 3642.66, 31152.39)
W_DIAG = (1.44e9, 1.0e7, 1.0e7, 1.0e8)
BETA = 1e-6


@pytest.fixture
def uganda_inputs() -> EpidemiologicalInputs:
    return EpidemiologicalInputs(
        T_S=T_S,
        T_i=T_I,
        b=BIRTHS,
        m_1=0.029,
        s=7 / 29,
        a_raw=0.030,
        m_2=0.077,
        p=0.003,
        d_H_frac=1 / 3,
    )


@pytest.fixture
def sir_rates(uganda_inputs):
    return derive_rates(uganda_inputs, ModelVariant.SIR)


@pytest.fixture
def sirh_rates(uganda_inputs):
    return derive_rates(uganda_inputs, ModelVariant.SIRH)


@pytest.fixture
def sir_model(sir_rates):
    return build_linear_sir(
        sir_rates,
        BIRTHS,
        observation=observation_matrix(0.2 / T_S, 0.0, 3),
        noise=np.diag(W_DIAG[:3]),
    )


@pytest.fixture
def sirh_observation() -> np.ndarray:
    return observation_matrix(0.2 / T_S, 0.6 / T_R, 4)


@pytest.fixture
def sirh_model(sirh_rates, sirh_observation):
    return build_linear_sirh(
        sirh_rates, BIRTHS, observation=sirh_observation, noise=np.diag(W_DIAG)
    )


@pytest.fixture
def contagious_model(sirh_rates, sirh_observation):
    return build_contagious_sirh(
        sirh_rates, BIRTHS, BETA, observation=sirh_observation, noise=np.diag(W_DIAG)
    )


@pytest.fixture
def sirh_steady_state(sirh_rates):
    return steady_state_closed_form(sirh_rates, BIRTHS, ModelVariant.SIRH)
