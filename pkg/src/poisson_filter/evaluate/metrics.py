import logging
from typing import Optional, Sequence, Union

import numpy as np

from poisson_filter.exceptions import PoissonFilterModelException
from poisson_filter.evaluate.objects import CoverageReport
from poisson_filter.filters.objects import FilterEstimate
from poisson_filter.models.objects import DerivedRates, FloatArray
from poisson_filter.simulate.objects import Trajectory

logger = logging.getLogger(__name__)

NOMINAL_2SIGMA_COVERAGE = 0.9545
DAYS_PER_YEAR = 365

# Either a sequence of estimates or (means, covariance diagonals) stacked by step.
Estimates = Union[Sequence[FilterEstimate], tuple[FloatArray, FloatArray]]


def stack_estimates(estimates: Estimates) -> tuple[FloatArray, FloatArray]:
    if isinstance(estimates, tuple) and len(estimates) == 2 and isinstance(
        estimates[0], np.ndarray
    ):
        return estimates[0], estimates[1]
    sequence = list(estimates)
    means = np.stack([est.x_hat for est in sequence])  # type: ignore[union-attr]
    variances = np.stack([est.variances for est in sequence])  # type: ignore[union-attr]
    return means, variances


def _aligned(estimates: FloatArray, truth: FloatArray) -> None:
    if estimates.shape != truth.shape:
        raise PoissonFilterModelException(
            exception_message=(
                f"estimates {estimates.shape} and truth {truth.shape} are not aligned"
            )
        )


def rmse(
    estimates: Union[Estimates, FloatArray],
    truth: Union[FloatArray, Sequence[FloatArray]],
    component: int,
    *,
    burn_in: int = 0,
) -> float:
    """Root mean squared error of one state component over steps ``burn_in`` onward."""
    means = estimates if isinstance(estimates, np.ndarray) else stack_estimates(estimates)[0]
    truth_array = np.asarray(truth, dtype=np.float64)
    _aligned(means, truth_array)
    errors = means[burn_in:, ..., component] - truth_array[burn_in:, ..., component]
    if errors.size == 0:
        raise PoissonFilterModelException(exception_message="no steps left after burn-in")
    return float(np.sqrt(np.mean(errors**2)))


def coverage_2sigma(
    estimates: Estimates,
    truth: Union[FloatArray, Sequence[FloatArray]],
    *,
    components: Optional[Sequence[str]] = None,
    burn_in: int = 0,
    filter_name: Optional[str] = None,
) -> CoverageReport:
    """Share of steps with |truth - estimate| <= 2 sqrt(P_ii), per component."""
    means, variances = stack_estimates(estimates)
    truth_array = np.asarray(truth, dtype=np.float64)
    _aligned(means, truth_array)
    if (variances < 0).any():
        raise PoissonFilterModelException(exception_message="covariance diagonal is negative")
    inside = np.abs(truth_array - means)[burn_in:] <= 2.0 * np.sqrt(variances[burn_in:])
    names = components or [f"x{i}" for i in range(means.shape[-1])]
    fractions = {
        name: float(np.mean(inside[..., i])) for i, name in enumerate(names)
    }
    return CoverageReport(
        fractions=fractions, n_steps=int(inside.shape[0]), filter_name=filter_name
    )


def zero_observation_fraction(trajectory: Union[Trajectory, FloatArray]) -> dict[str, float]:
    """Share of steps with zero reported cases, per observed component."""
    if isinstance(trajectory, Trajectory):
        counts = trajectory.counts
        names: Sequence[str] = trajectory.observed
    else:
        counts = np.asarray(trajectory)
        names = [f"y{i}" for i in range(counts.shape[-1])]
    zeros = counts == 0
    return {name: float(np.mean(zeros[..., i])) for i, name in enumerate(names)}


def cumulative_deaths(trajectory: Trajectory, rates: DerivedRates) -> dict[str, FloatArray]:
    """Running totals of sepsis deaths d_I I_k and, for SIRH, PIH deaths d_H H_k."""
    components = list(trajectory.components)
    deaths = {"sepsis": np.cumsum(rates.d_I * trajectory.truth[:, components.index("I")])}
    if "H" in components:
        deaths["pih"] = np.cumsum(rates.d_H * trajectory.truth[:, components.index("H")])
    return deaths


def last_year_deaths(cumulative: dict[str, FloatArray]) -> dict[str, float]:
    """Deaths over the final 365 steps of a cumulative series."""
    totals = {}
    for cause, series in cumulative.items():
        start = series[-DAYS_PER_YEAR - 1] if len(series) > DAYS_PER_YEAR else 0.0
        totals[cause] = float(series[-1] - start)
    return totals
