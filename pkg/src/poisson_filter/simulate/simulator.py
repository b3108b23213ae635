import logging
from typing import Optional, Union

import numpy as np
import scipy.linalg

from poisson_filter.exceptions import (
    PoissonFilterNumericalException,
    PoissonFilterSimulationException,
)
from poisson_filter.filters.objects import Observation
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.nonlinear import NonlinearModel
from poisson_filter.models.objects import FloatArray
from poisson_filter.simulate.objects import Scenario, Trajectory
from poisson_filter.simulate.rng import make_generator

logger = logging.getLogger(__name__)

Model = Union[LinearModel, NonlinearModel]


def noise_factor(W: FloatArray) -> FloatArray:
    """L with L L^T = W: Cholesky, or an eigen factor when W is only semidefinite."""
    try:
        return scipy.linalg.cholesky(W, lower=True)  # type: ignore[no-any-return]
    except np.linalg.LinAlgError:
        pass
    if np.count_nonzero(W - np.diag(np.diagonal(W))) == 0:
        diagonal = np.diagonal(W)
        if (diagonal < 0).any():
            raise PoissonFilterNumericalException(
                exception_message="W has negative variances and cannot be factored"
            )
        logger.debug("W is singular and diagonal; using its elementwise square root.")
        return np.diag(np.sqrt(diagonal))  # type: ignore[no-any-return]
    eigenvalues, eigenvectors = np.linalg.eigh(W)
    if eigenvalues.min() < -1e-9 * max(float(np.trace(W)), 1.0):
        raise PoissonFilterNumericalException(
            exception_message="W is not positive semidefinite and cannot be factored"
        )
    logger.warning("W is singular; sampling system noise through an eigen factor.")
    return eigenvectors * np.sqrt(np.maximum(eigenvalues, 0.0))  # type: ignore[no-any-return]


def step_truth(
    x: FloatArray,
    model: Model,
    rng: np.random.Generator,
    *,
    step: int,
    control: Optional[FloatArray] = None,
    noise_multiplier: float = 1.0,
    factor: Optional[FloatArray] = None,
) -> FloatArray:
    """x_k = max(0, f_{k-1}(x_{k-1}) + w_{k-1}) with w ~ N(0, noise_multiplier * W)."""
    if factor is None:
        factor = noise_factor(model.noise(step - 1))
    noise = np.sqrt(noise_multiplier) * (factor @ rng.standard_normal(model.dim))
    return np.maximum(0.0, model.step(x, step, control) + noise)  # type: ignore[no-any-return]


def sample_poisson(rates: FloatArray, rng: np.random.Generator, step: int = 0) -> Observation:
    """Independent Poisson counts, one per rate.

    numpy draws below a rate of 10 by the exact multiplication method and above it by
    transformed rejection, so both regimes follow the Poisson law exactly.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if (rates < 0).any() or not np.isfinite(rates).all():
        raise PoissonFilterSimulationException(
            exception_message=f"Poisson rates must be finite and nonnegative at step {step}"
        )
    return Observation(rng.poisson(rates), step)


def run_scenario(scenario: Scenario) -> Trajectory:
    """Generate truth and observations jointly, one step at a time, from the scenario seed."""
    model = scenario.model
    rng = make_generator(scenario.seed, scenario.trial)
    n = scenario.n_steps
    m = model.observation(0).shape[0]
    truth = np.empty((n + 1, model.dim))
    rates = np.empty((n + 1, m))
    counts = np.empty((n + 1, m), dtype=np.int64)

    factor = noise_factor(model.noise(0)) if model.constant_noise else None

    x = scenario.initial_state.copy()
    for k in range(n + 1):
        if k > 0:
            x = step_truth(
                x,
                model,
                rng,
                step=k,
                noise_multiplier=scenario.noise_multiplier,
                factor=factor,
            )
        truth[k] = x
        rates[k] = model.observation(k) @ x
        counts[k] = sample_poisson(rates[k], rng, k).counts

    logger.debug(f"Simulated {scenario.name} for {n} steps (trial {scenario.trial})")
    return Trajectory(
        truth=truth,
        rates=rates,
        counts=counts,
        seed=scenario.seed,
        components=model.components,
        observed=_observed(model),
        meta={
            "scenario": scenario.name,
            "noise_multiplier": scenario.noise_multiplier,
            "trial": scenario.trial,
        },
    )


def _observed(model: Model) -> tuple[str, ...]:
    if model.variant is not None:
        return model.variant.observed
    return tuple(f"y{i}" for i in range(model.observation(0).shape[0]))
