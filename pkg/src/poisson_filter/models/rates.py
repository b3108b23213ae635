import logging

from poisson_filter.exceptions import PoissonFilterModelException
from poisson_filter.models.objects import (
    DerivedRates,
    EpidemiologicalInputs,
    ModelVariant,
    SteadyState,
)

logger = logging.getLogger(__name__)

DAYS_PER_YEAR = 365


def recovered_per_birth(inputs: EpidemiologicalInputs) -> float:
    """Fraction of live births that are infected and survive the neonatal period.

    Infections minus sepsis deaths minus deaths from other causes among the infected
    (30 - 7 - 30 * 22/1000 = 22.34 per 1000 for the Uganda inputs).
    """
    sepsis_deaths = inputs.s * inputs.m_1
    other_deaths = inputs.a_raw * (1.0 - inputs.s) * inputs.m_1
    return inputs.a_raw - sepsis_deaths - other_deaths


def derive_rates(inputs: EpidemiologicalInputs, variant: ModelVariant) -> DerivedRates:
    """Convert population statistics into daily rates for the linear models."""
    logger.debug(f"Deriving {variant.value} rates from {inputs}")
    if inputs.T_i <= inputs.T_S:
        raise PoissonFilterModelException(
            exception_message=f"T_i must exceed T_S, got T_S={inputs.T_S}, T_i={inputs.T_i}"
        )
    T_R = inputs.T_R
    g_S = 1.0 / inputs.T_S
    g_R = 1.0 / T_R
    d = (1.0 - inputs.s) * inputs.m_1 / inputs.T_S
    sepsis_mortality = inputs.s * inputs.m_1
    if inputs.a_raw > 0:
        d_I = sepsis_mortality / (inputs.a_raw * inputs.T_S)
    elif sepsis_mortality == 0:
        d_I = 0.0
    else:
        raise PoissonFilterModelException(
            exception_message="a_raw must be positive when sepsis mortality s * m_1 is positive"
        )
    c = g_S - d - d_I
    if c < 0:
        raise PoissonFilterModelException(
            exception_message=(
                f"recovery rate c = g_S - d - d_I = {c:.6g} is negative; "
                "sepsis mortality exceeds the infections it is attributed to"
            )
        )

    h = 0.0
    d_H = 0.0
    if variant is ModelVariant.SIR:
        d_R = (inputs.m_2 - inputs.m_1) / T_R
    else:
        if inputs.p is None or inputs.d_H_frac is None:
            raise PoissonFilterModelException(
                exception_message=f"{variant.value} requires the inputs p and d_H_frac"
            )
        survivors = recovered_per_birth(inputs)
        if inputs.p > 0:
            if survivors <= 0:
                raise PoissonFilterModelException(
                    exception_message="p > 0 requires a positive recovered-per-birth fraction"
                )
            h = inputs.p / survivors / T_R
        d_H = inputs.d_H_frac / T_R
        d_R = (inputs.m_2 - inputs.m_1 - inputs.p * inputs.d_H_frac) / T_R
        if d_R < 0:
            raise PoissonFilterModelException(
                exception_message=(
                    f"d_R = (m_2 - m_1 - p * d_H_frac) / T_R = {d_R:.6g} is negative"
                )
            )

    try:
        return DerivedRates(
            g_S=g_S,
            g_R=g_R,
            a=inputs.a_raw / inputs.T_S,
            d=d,
            d_I=d_I,
            d_R=d_R,
            c=c,
            h=h,
            d_H=d_H,
            T_R=T_R,
        )
    except ValueError as e:
        raise PoissonFilterModelException(
            exception_message=f"derived daily rates must lie in [0, 1): {e}"
        ) from e


def annual_incidence(rates: DerivedRates, steady: SteadyState) -> float:
    """New hydrocephalus cases per year at equilibrium, 365 * h * R_inf."""
    return DAYS_PER_YEAR * rates.h * steady["R"]


def annual_deaths(rates: DerivedRates, steady: SteadyState) -> dict[str, float]:
    """Deaths per year at equilibrium attributable to sepsis and, for SIRH, to PIH."""
    deaths = {"sepsis": DAYS_PER_YEAR * rates.d_I * steady["I"]}
    if "H" in steady.components:
        deaths["pih"] = DAYS_PER_YEAR * rates.d_H * steady["H"]
    return deaths
