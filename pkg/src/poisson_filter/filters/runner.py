import logging
from abc import ABC, abstractmethod
from typing import Iterator, Optional, Sequence, Union

import numpy as np
from attrs import define, field, validators

from poisson_filter.exceptions import (
    PoissonFilterModelException,
    PoissonFilterNumericalException,
)
from poisson_filter.filters.kalman import epkf_forecast, forecast, pkf_update
from poisson_filter.filters.objects import FilterConfig, FilterEstimate, Observation
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.nonlinear import NonlinearModel
from poisson_filter.models.objects import FloatArray

logger = logging.getLogger(__name__)

Model = Union[LinearModel, NonlinearModel]


@define(kw_only=True)
class BaseFilter(ABC):
    """Forecast/assimilate driver shared by the PKF, EPKF and WLS estimators."""

    model: Model = field(repr=False)
    config: FilterConfig = field(
        factory=FilterConfig, validator=validators.instance_of(FilterConfig)
    )

    @abstractmethod
    def forecast(
        self, est: FilterEstimate, control: Optional[FloatArray] = None
    ) -> FilterEstimate:
        """Prior at est.step + 1."""

    def update(
        self,
        prior: FilterEstimate,
        obs: Observation,
        x_true: Optional[FloatArray] = None,
    ) -> FilterEstimate:
        B = self.model.observation(prior.step)
        return pkf_update(prior, obs, B, self.config, x_true)

    def advance(
        self,
        est: FilterEstimate,
        obs: Observation,
        x_true: Optional[FloatArray] = None,
        control: Optional[FloatArray] = None,
    ) -> FilterEstimate:
        if obs.step != est.step + 1:
            raise PoissonFilterModelException(
                exception_message=(
                    f"observation at step {obs.step} does not follow the estimate at step "
                    f"{est.step}"
                )
            )
        return self.update(self.forecast(est, control), obs, x_true)

    def iterate(
        self,
        initial: FilterEstimate,
        observations: Sequence[Observation],
        truth: Optional[Sequence[FloatArray]] = None,
        controls: Optional[Sequence[Optional[FloatArray]]] = None,
    ) -> Iterator[FilterEstimate]:
        """Yield one posterior per observation; failures carry the step they occurred at."""
        if truth is not None and len(truth) != len(observations):
            raise PoissonFilterModelException(
                exception_message="truth and observation sequences differ in length"
            )
        if controls is not None and len(controls) != len(observations):
            raise PoissonFilterModelException(
                exception_message="control and observation sequences differ in length"
            )
        est = initial
        for i, obs in enumerate(observations):
            x_true = None if truth is None else truth[i]
            control = None if controls is None else controls[i]
            try:
                est = self.advance(est, obs, x_true, control)
            except PoissonFilterNumericalException as e:
                if e.step is not None:
                    raise
                raise PoissonFilterNumericalException(
                    exception_message=e.exception_message, step=obs.step
                ) from e
            yield est

    def run(
        self,
        initial: FilterEstimate,
        observations: Sequence[Observation],
        truth: Optional[Sequence[FloatArray]] = None,
        controls: Optional[Sequence[Optional[FloatArray]]] = None,
    ) -> list[FilterEstimate]:
        return [initial, *self.iterate(initial, observations, truth, controls)]

    def history(
        self,
        initial: FilterEstimate,
        observations: Sequence[Observation],
        truth: Optional[Sequence[FloatArray]] = None,
    ) -> tuple[FloatArray, FloatArray]:
        """Means and covariance diagonals of every posterior, initial estimate first."""
        shape = (len(observations) + 1,) + initial.x_hat.shape
        means = np.empty(shape)
        variances = np.empty(shape)
        means[0] = initial.x_hat
        variances[0] = initial.variances
        for i, est in enumerate(self.iterate(initial, observations, truth), start=1):
            means[i] = est.x_hat
            variances[i] = est.variances
        return means, variances


@define(kw_only=True)
class PoissonKalmanFilter(BaseFilter):
    """PKF on a linear model; with a fixed V it is the standard Kalman filter."""

    model: LinearModel = field(repr=False, validator=validators.instance_of(LinearModel))

    def forecast(
        self, est: FilterEstimate, control: Optional[FloatArray] = None
    ) -> FilterEstimate:
        return forecast(est, self.model, control, clamp=self.config.clamp_state)


@define(kw_only=True)
class ExtendedPoissonKalmanFilter(BaseFilter):
    """EPKF on the contagious model; with a fixed V it is the extended Kalman filter."""

    model: NonlinearModel = field(repr=False, validator=validators.instance_of(NonlinearModel))

    def forecast(
        self, est: FilterEstimate, control: Optional[FloatArray] = None
    ) -> FilterEstimate:
        return epkf_forecast(est, self.model, control, clamp=self.config.clamp_state)


@define(kw_only=True)
class WeightedLeastSquaresEstimator(BaseFilter):
    """Recursive WLS for a constant state observed through Poisson counts."""

    def forecast(
        self, est: FilterEstimate, control: Optional[FloatArray] = None
    ) -> FilterEstimate:
        """Static prior: the previous posterior carried to the next step unchanged."""
        return FilterEstimate(x_hat=est.x_hat, P=est.P, step=est.step + 1)


def make_filter(model: Model, config: FilterConfig) -> BaseFilter:
    if isinstance(model, NonlinearModel):
        return ExtendedPoissonKalmanFilter(model=model, config=config)
    return PoissonKalmanFilter(model=model, config=config)


def run_filter(
    model: Model,
    initial: FilterEstimate,
    observations: Sequence[Observation],
    cfg: FilterConfig,
    truth: Optional[Sequence[FloatArray]] = None,
    controls: Optional[Sequence[Optional[FloatArray]]] = None,
) -> list[FilterEstimate]:
    """Initial estimate followed by one posterior per observation."""
    logger.debug(f"Running {type(model).__name__} filter over {len(observations)} steps")
    return make_filter(model, cfg).run(initial, observations, truth, controls)
