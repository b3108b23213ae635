import logging
from typing import Optional

import numpy as np

from poisson_filter.exceptions import (
    PoissonFilterConfigException,
    PoissonFilterModelException,
    PoissonFilterNumericalException,
)
from poisson_filter.filters.objects import FilterConfig, FilterEstimate, Observation, VarianceMode
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.nonlinear import NonlinearModel
from poisson_filter.models.objects import FloatArray

logger = logging.getLogger(__name__)


def _transpose(matrix: FloatArray) -> FloatArray:
    return np.swapaxes(matrix, -1, -2)


def symmetrize(P: FloatArray) -> FloatArray:
    return (P + _transpose(P)) / 2  # type: ignore[no-any-return]


def _diag(values: FloatArray) -> FloatArray:
    return values[..., None] * np.eye(values.shape[-1])  # type: ignore[no-any-return]


def _check_dim(est: FilterEstimate, dim: int) -> None:
    if est.dim != dim:
        raise PoissonFilterModelException(
            exception_message=f"estimate has {est.dim} states but the model has {dim}"
        )


def _propagate(
    transition: FloatArray, est: FilterEstimate, mean: FloatArray, W: FloatArray, clamp: bool
) -> FilterEstimate:
    if clamp:
        mean = np.maximum(0.0, mean)
    P = symmetrize(transition @ est.P @ _transpose(transition) + W)
    return FilterEstimate(x_hat=mean, P=P, step=est.step + 1)


def forecast(
    est: FilterEstimate,
    model: LinearModel,
    control: Optional[FloatArray] = None,
    *,
    clamp: bool = True,
) -> FilterEstimate:
    """Prior at step k from the posterior at k-1: x = F x + G u + b, P = F P F^T + W."""
    _check_dim(est, model.dim)
    k = est.step + 1
    mean = model.step(est.x_hat, k, control)
    return _propagate(model.transition(k - 1), est, mean, model.noise(k - 1), clamp)


def epkf_forecast(
    est: FilterEstimate,
    model: NonlinearModel,
    control: Optional[FloatArray] = None,
    *,
    clamp: bool = True,
) -> FilterEstimate:
    """Prior through the nonlinear map, covariance through its Jacobian at x_hat+."""
    _check_dim(est, model.dim)
    k = est.step + 1
    jacobian = model.jacobian(est.x_hat, k)
    mean = model.step(est.x_hat, k, control)
    return _propagate(jacobian, est, mean, model.noise(k - 1), clamp)


def observation_variance(
    reference: FloatArray,
    B: FloatArray,
    cfg: FilterConfig,
    x_true: Optional[FloatArray] = None,
) -> FloatArray:
    """Diagonal of V_k for the configured mode; ``reference`` is the state V is built from."""
    if cfg.v_mode is VarianceMode.FIXED:
        assert cfg.v_const is not None
        if cfg.v_const.shape != (B.shape[0],):
            raise PoissonFilterModelException(
                exception_message=(
                    f"v_const has {cfg.v_const.shape[0]} entries; "
                    f"B has {B.shape[0]} observation rows"
                )
            )
        shape = reference.shape[:-1] + (B.shape[0],)
        return np.broadcast_to(cfg.v_const, shape)
    if cfg.v_mode is VarianceMode.ORACLE:
        if x_true is None:
            raise PoissonFilterConfigException(
                exception_message="the oracle variance mode needs the true state"
            )
        reference = np.asarray(x_true, dtype=np.float64)
    return np.maximum(cfg.delta, reference @ B.T)  # type: ignore[no-any-return]


def _gain(P: FloatArray, B: FloatArray, V: FloatArray, step: int) -> FloatArray:
    """K = P B^T (B P B^T + V)^-1 through a Cholesky factor of the innovation covariance."""
    BP = B @ P
    innovation_cov = BP @ B.T + _diag(V)
    if not np.isfinite(innovation_cov).all():
        raise PoissonFilterNumericalException(
            exception_message="innovation covariance is not finite", step=step
        )
    try:
        lower = np.linalg.cholesky(innovation_cov)
    except np.linalg.LinAlgError as e:
        raise PoissonFilterNumericalException(
            exception_message=(
                "innovation covariance is not positive definite; delta may be too small "
                "or P corrupt"
            ),
            step=step,
        ) from e
    half = np.linalg.solve(lower, BP)
    return _transpose(np.linalg.solve(_transpose(lower), half))


def _check_observation(est: FilterEstimate, obs: Observation, B: FloatArray) -> FloatArray:
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[-1] != est.dim or obs.counts.shape[-1] != B.shape[0]:
        raise PoissonFilterModelException(
            exception_message=(
                f"B of shape {B.shape} does not fit {est.dim} states and "
                f"{obs.counts.shape[-1]} observations"
            )
        )
    return B


def assimilate(
    prior: FilterEstimate,
    obs: Observation,
    B: FloatArray,
    V: FloatArray,
    *,
    clamp: bool = True,
) -> FilterEstimate:
    """Kalman update with observation variance diag(V) and the Joseph covariance form."""
    B = _check_observation(prior, obs, B)
    K = _gain(prior.P, B, V, prior.step)
    innovation = obs.counts - prior.x_hat @ B.T
    mean = prior.x_hat + (K @ innovation[..., None])[..., 0]
    if clamp:
        mean = np.maximum(0.0, mean)
    A = np.eye(prior.dim) - K @ B
    P = symmetrize(A @ prior.P @ _transpose(A) + K @ _diag(V) @ _transpose(K))
    return FilterEstimate(x_hat=mean, P=P, step=prior.step, gain=K, innovation=innovation)


def pkf_update(
    prior: FilterEstimate,
    obs: Observation,
    B: FloatArray,
    cfg: FilterConfig,
    x_true: Optional[FloatArray] = None,
) -> FilterEstimate:
    """Posterior with V_k = diag(max(delta, B x_hat-)), or the oracle / fixed variant."""
    B = _check_observation(prior, obs, B)
    V = observation_variance(prior.x_hat, B, cfg, x_true)
    return assimilate(prior, obs, B, V, clamp=cfg.clamp_state)


epkf_update = pkf_update


def wls_estimate(
    prev: FilterEstimate,
    obs: Observation,
    B: FloatArray,
    cfg: FilterConfig,
    x_true: Optional[FloatArray] = None,
) -> FilterEstimate:
    """Recursive weighted least squares for a static state, V_k from x_hat_{k-1}."""
    B = _check_observation(prev, obs, B)
    prior = FilterEstimate(x_hat=prev.x_hat, P=prev.P, step=prev.step + 1)
    V = observation_variance(prev.x_hat, B, cfg, x_true)
    return assimilate(prior, obs, B, V, clamp=cfg.clamp_state)
