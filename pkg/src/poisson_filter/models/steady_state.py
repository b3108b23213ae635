import logging
from typing import Optional, Union

import numpy as np

from poisson_filter.exceptions import (
    PoissonFilterModelException,
    PoissonFilterNumericalException,
)
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.nonlinear import NonlinearModel
from poisson_filter.models.objects import DerivedRates, FloatArray, ModelVariant, SteadyState

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 10**6
DEFAULT_DAMPING = 0.5
DEFAULT_TOLERANCE = 1e-12


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise PoissonFilterModelException(
            exception_message=f"steady state denominator {name} = {value} must be positive"
        )
    return value


def steady_state_closed_form(
    rates: DerivedRates, b: float, variant: ModelVariant
) -> SteadyState:
    """Closed-form equilibrium of the noncontagious SIR/SIRH models."""
    susceptible_out = _positive("d + a + g_S", rates.d + rates.a + rates.g_S)
    infected_out = _positive("d + d_I + c", rates.d + rates.d_I + rates.c)
    S = b / susceptible_out
    I = rates.a * b / (infected_out * susceptible_out)  # noqa: E741
    if variant is ModelVariant.SIR:
        recovered_out = _positive("d_R + g_R", rates.d_R + rates.g_R)
        R = rates.a * b * rates.c / (recovered_out * infected_out * susceptible_out)
        return SteadyState(np.array([S, I, R]), ModelVariant.SIR)

    recovered_out = _positive("d_R + g_R + h", rates.d_R + rates.g_R + rates.h)
    R = rates.a * b * rates.c / (recovered_out * infected_out * susceptible_out)
    H = rates.h * R / _positive("d_R + d_H", rates.d_R + rates.d_H)
    return SteadyState(np.array([S, I, R, H]), ModelVariant.SIRH)


def _linear_fixed_point(model: LinearModel) -> FloatArray:
    F = model.transition(0)
    radius = float(np.abs(np.linalg.eigvals(F)).max(initial=0.0))
    if radius >= 1:
        raise PoissonFilterNumericalException(
            exception_message=f"spectral radius of F is {radius:.6g}; no stable steady state"
        )
    return np.linalg.solve(np.eye(model.dim) - F, model.forcing(1))  # type: ignore[no-any-return]


def steady_state_numeric(
    model: Union[LinearModel, NonlinearModel],
    *,
    initial: Optional[FloatArray] = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    damping: float = DEFAULT_DAMPING,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SteadyState:
    """Equilibrium of a model with constant matrices.

    Linear models solve (I - F) x = b directly. Contagious models iterate
    x <- (1 - damping) x + damping max(0, f(x)) from the noncontagious equilibrium
    until the relative step falls below ``tolerance``.
    """
    if isinstance(model, LinearModel):
        values = _linear_fixed_point(model)
        variant = model.variant
        if variant is None or variant.dim != model.dim:
            if model.dim not in (3, 4):
                raise PoissonFilterModelException(
                    exception_message=f"steady state needs 3 or 4 states, got {model.dim}"
                )
            variant = ModelVariant.SIR if model.dim == 3 else ModelVariant.SIRH
        return SteadyState(values, variant)

    x = _linear_fixed_point(model.base) if initial is None else np.asarray(initial, float)
    logger.debug(f"Iterating the contagious map from {x}")
    for iteration in range(1, max_iterations + 1):
        target = np.maximum(0.0, model.step(x, 1))
        step = damping * (target - x)
        x = x + step
        if np.linalg.norm(step) <= tolerance * max(float(np.linalg.norm(x)), 1.0):
            if iteration > max_iterations // 2:
                logger.warning(f"Fixed point needed {iteration} of {max_iterations} iterations")
            logger.debug(f"Contagious fixed point {x} after {iteration} iterations")
            return SteadyState(x, ModelVariant.SIRH_CONTAGIOUS)
    raise PoissonFilterNumericalException(
        exception_message=f"fixed-point iteration did not converge in {max_iterations} steps"
    )
