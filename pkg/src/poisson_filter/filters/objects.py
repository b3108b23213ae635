import logging
from enum import Enum
from typing import Any, Optional

import numpy as np
from attrs import field, frozen, validators
from numpy.typing import NDArray

from poisson_filter.exceptions import PoissonFilterConfigException, PoissonFilterModelException
from poisson_filter.models.objects import FloatArray

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.1
DEFAULT_P0_SCALE = 1e4


class VarianceMode(str, Enum):
    """How the observation noise covariance V_k is formed."""

    PREDICTED = "predicted"
    FIXED = "fixed"
    ORACLE = "oracle"


def _optional_vector(value: Any) -> Optional[FloatArray]:
    return None if value is None else np.atleast_1d(np.asarray(value, dtype=np.float64))


@frozen(kw_only=True)
class FilterConfig:
    """Observation-variance policy of a filter run.

    ``v_const`` is the diagonal of the fixed V used when ``v_mode`` is FIXED.
    """

    delta: float = field(default=DEFAULT_DELTA, validator=validators.gt(0.0))
    v_mode: VarianceMode = field(
        default=VarianceMode.PREDICTED,
        converter=VarianceMode,
        validator=validators.instance_of(VarianceMode),
    )
    v_const: Optional[FloatArray] = field(default=None, eq=False, converter=_optional_vector)
    clamp_state: bool = field(default=True, validator=validators.instance_of(bool))

    def __attrs_post_init__(self) -> None:
        if self.v_mode is VarianceMode.FIXED:
            if self.v_const is None:
                raise PoissonFilterConfigException(
                    exception_message="a fixed observation variance needs v_const"
                )
            if (self.v_const <= 0).any():
                raise PoissonFilterConfigException(
                    exception_message="v_const entries must be positive"
                )


def fixed_variance(
    B: FloatArray, reference: FloatArray, delta: float = DEFAULT_DELTA
) -> FloatArray:
    """V_const diagonal max(delta, B x_ref) for the fixed-gain baseline."""
    rates = np.asarray(B, dtype=np.float64) @ np.asarray(reference, dtype=np.float64)
    return np.maximum(delta, rates)  # type: ignore[no-any-return]


def _counts(value: Any) -> NDArray[np.int64]:
    counts = np.asarray(value)
    if counts.dtype.kind == "f":
        if not np.array_equal(counts, np.round(counts)):
            raise PoissonFilterModelException(
                exception_message="observation counts must be integers"
            )
        counts = counts.astype(np.int64)
    return np.atleast_1d(counts.astype(np.int64))


@frozen
class Observation:
    """Poisson case counts y_k observed at step k."""

    counts: NDArray[np.int64] = field(eq=False, converter=_counts)
    step: int = field(validator=validators.instance_of(int))

    def __attrs_post_init__(self) -> None:
        if (self.counts < 0).any():
            raise PoissonFilterModelException(
                exception_message=f"observation counts must be nonnegative at step {self.step}"
            )


@frozen(kw_only=True)
class FilterEstimate:
    """Mean and covariance of the state at ``step``, optionally with the gain that made it.

    ``x_hat`` has shape (..., dim) and ``P`` shape (..., dim, dim); leading axes stack
    independent runs.
    """

    x_hat: FloatArray = field(eq=False, converter=lambda v: np.asarray(v, dtype=np.float64))
    P: FloatArray = field(eq=False, converter=lambda v: np.asarray(v, dtype=np.float64))
    step: int = field(default=0, validator=validators.instance_of(int))
    gain: Optional[FloatArray] = field(default=None, eq=False)
    innovation: Optional[FloatArray] = field(default=None, eq=False)

    def __attrs_post_init__(self) -> None:
        dim = self.x_hat.shape[-1]
        if self.P.shape != self.x_hat.shape + (dim,):
            raise PoissonFilterModelException(
                exception_message=(
                    f"covariance shape {self.P.shape} does not match "
                    f"state shape {self.x_hat.shape}"
                )
            )

    @property
    def dim(self) -> int:
        return int(self.x_hat.shape[-1])

    @property
    def variances(self) -> FloatArray:
        return np.diagonal(self.P, axis1=-2, axis2=-1)  # type: ignore[no-any-return]

    def check_invariants(self, clamped: bool = True) -> None:
        """Raise unless P is symmetric PSD and, when clamped, x_hat is nonnegative."""
        scale = max(float(np.abs(self.P).max(initial=0.0)), 1.0)
        if np.abs(self.P - np.swapaxes(self.P, -1, -2)).max(initial=0.0) > 1e-12 * scale:
            raise PoissonFilterModelException(exception_message="P is not symmetric")
        trace = np.trace(self.P, axis1=-2, axis2=-1)
        smallest = np.linalg.eigvalsh(self.P)[..., 0]
        if (smallest < -1e-9 * np.maximum(trace, 1.0)).any():
            raise PoissonFilterModelException(exception_message="P is not positive semidefinite")
        if clamped and (self.x_hat < 0).any():
            raise PoissonFilterModelException(exception_message="x_hat has negative entries")


def initial_estimate(
    x0: Any, p0: Optional[Any] = None, *, step: int = 0, p0_scale: float = DEFAULT_P0_SCALE
) -> FilterEstimate:
    """Starting posterior; P_0 defaults to ``p0_scale`` times the identity."""
    x = np.asarray(x0, dtype=np.float64)
    if p0 is None:
        P = np.broadcast_to(p0_scale * np.eye(x.shape[-1]), x.shape + (x.shape[-1],)).copy()
    else:
        P = np.asarray(p0, dtype=np.float64)
    return FilterEstimate(x_hat=x.copy(), P=P, step=step)
