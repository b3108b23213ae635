import logging
from typing import Any, Callable, Optional, Union

import numpy as np
from attrs import evolve, field, frozen

from poisson_filter.exceptions import PoissonFilterModelException
from poisson_filter.models.objects import DerivedRates, FloatArray, ModelVariant

logger = logging.getLogger(__name__)

# A matrix or vector that is either constant or indexed by the time step.
Schedule = Union[FloatArray, Callable[[int], FloatArray]]


def _as_schedule(value: Any) -> Schedule:
    if callable(value):
        return value  # type: ignore[no-any-return]
    return np.asarray(value, dtype=np.float64)


def _at(value: Schedule, k: int) -> FloatArray:
    if callable(value):
        return np.asarray(value(k), dtype=np.float64)
    return value


def check_covariance(matrix: FloatArray, name: str) -> None:
    """Raise unless ``matrix`` is square, symmetric and positive semidefinite."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise PoissonFilterModelException(
            exception_message=f"{name} must be square, got shape {matrix.shape}"
        )
    scale = max(float(np.abs(matrix).max(initial=0.0)), 1.0)
    if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * scale):
        raise PoissonFilterModelException(exception_message=f"{name} must be symmetric")
    if matrix.size and np.linalg.eigvalsh(matrix).min() < -1e-9 * max(np.trace(matrix), 1.0):
        raise PoissonFilterModelException(
            exception_message=f"{name} must be positive semidefinite"
        )


@frozen(kw_only=True)
class LinearModel:
    """x_k = F_{k-1} x_{k-1} + G u_{k-1} + b_k + w_{k-1}, observed through rates B_k x_k.

    F, b, W and B are either constant arrays or callables of the step index.
    """

    F: Schedule = field(eq=False, converter=_as_schedule)
    b: Schedule = field(eq=False, converter=_as_schedule)
    W: Schedule = field(eq=False, converter=_as_schedule)
    B: Schedule = field(eq=False, converter=_as_schedule)
    G: Optional[FloatArray] = field(
        default=None,
        eq=False,
        converter=lambda g: None if g is None else np.asarray(g, dtype=np.float64),
    )
    variant: Optional[ModelVariant] = field(default=None)
    rates: Optional[DerivedRates] = field(default=None)

    def __attrs_post_init__(self) -> None:
        F = self.transition(0)
        if F.ndim != 2 or F.shape[0] != F.shape[1]:
            raise PoissonFilterModelException(
                exception_message=f"F must be square, got shape {F.shape}"
            )
        dim = F.shape[0]
        if self.forcing(1).shape != (dim,):
            raise PoissonFilterModelException(
                exception_message=f"b must have shape ({dim},), got {self.forcing(1).shape}"
            )
        W = self.noise(0)
        if W.shape != (dim, dim):
            raise PoissonFilterModelException(
                exception_message=f"W must have shape ({dim}, {dim}), got {W.shape}"
            )
        check_covariance(W, "W")
        B = self.observation(0)
        if B.ndim != 2 or B.shape[1] != dim:
            raise PoissonFilterModelException(
                exception_message=f"B must have {dim} columns, got shape {B.shape}"
            )
        if (B < 0).any():
            raise PoissonFilterModelException(
                exception_message="B must be entrywise nonnegative (Poisson rates)"
            )
        if self.G is not None and (self.G.ndim != 2 or self.G.shape[0] != dim):
            raise PoissonFilterModelException(
                exception_message=f"G must have {dim} rows, got shape {self.G.shape}"
            )

    @property
    def dim(self) -> int:
        return int(self.transition(0).shape[0])

    @property
    def components(self) -> tuple[str, ...]:
        if self.variant is not None and self.variant.dim == self.dim:
            return self.variant.components
        return tuple(f"x{i}" for i in range(self.dim))

    @property
    def constant_noise(self) -> bool:
        return not callable(self.W)

    def transition(self, k: int) -> FloatArray:
        return _at(self.F, k)

    def forcing(self, k: int) -> FloatArray:
        return _at(self.b, k)

    def noise(self, k: int) -> FloatArray:
        return _at(self.W, k)

    def observation(self, k: int) -> FloatArray:
        return _at(self.B, k)

    def step(self, x: FloatArray, k: int, control: Optional[FloatArray] = None) -> FloatArray:
        """Advance x_{k-1} to x_k without noise; ``x`` may carry leading batch axes."""
        out = x @ self.transition(k - 1).T
        if control is not None:
            if self.G is None:
                raise PoissonFilterModelException(
                    exception_message="a control input was given to a model without G"
                )
            out = out + np.asarray(control, dtype=np.float64) @ self.G.T
        return out + self.forcing(k)  # type: ignore[no-any-return]

    def scaled_noise(self, multiplier: float) -> "LinearModel":
        """The same model with W multiplied by ``multiplier``."""
        W = self.W
        if callable(W):
            return evolve(self, W=lambda k: multiplier * np.asarray(W(k), dtype=np.float64))
        return evolve(self, W=multiplier * W)

    def with_observation(self, B: Schedule) -> "LinearModel":
        return evolve(self, B=B)

    def with_noise(self, W: Schedule) -> "LinearModel":
        return evolve(self, W=W)


def observation_matrix(c_I: float, c_H: float, dim: int) -> FloatArray:
    """Poisson rate matrix observing I (and H for the 4-state models)."""
    if c_I < 0 or c_H < 0:
        raise PoissonFilterModelException(
            exception_message=f"observation rates must be nonnegative, got c_I={c_I}, c_H={c_H}"
        )
    if dim == 3:
        B = np.zeros((1, 3))
        B[0, 1] = c_I
    elif dim == 4:
        B = np.zeros((2, 4))
        B[0, 1] = c_I
        B[1, 3] = c_H
    else:
        raise PoissonFilterModelException(
            exception_message=f"observation matrix is defined for 3 or 4 states, got {dim}"
        )
    if not B.any():
        logger.warning("Observation matrix is zero; the filter will run on the delta floor.")
    return B


def _default(value: Optional[Schedule], shape: tuple[int, ...]) -> Schedule:
    return np.zeros(shape) if value is None else value


def build_linear_sir(
    rates: DerivedRates,
    b: float,
    *,
    observation: Optional[Schedule] = None,
    noise: Optional[Schedule] = None,
) -> LinearModel:
    F = np.array(
        [
            [1 - rates.d - rates.a - rates.g_S, 0.0, 0.0],
            [rates.a, 1 - rates.d - rates.d_I - rates.c, 0.0],
            [0.0, rates.c, 1 - rates.d_R - rates.g_R],
        ]
    )
    return LinearModel(
        F=F,
        b=np.array([b, 0.0, 0.0]),
        W=_default(noise, (3, 3)),
        B=_default(observation, (1, 3)),
        variant=ModelVariant.SIR,
        rates=rates,
    )


def build_linear_sirh(
    rates: DerivedRates,
    b: float,
    *,
    observation: Optional[Schedule] = None,
    noise: Optional[Schedule] = None,
) -> LinearModel:
    F = np.array(
        [
            [1 - rates.d - rates.a - rates.g_S, 0.0, 0.0, 0.0],
            [rates.a, 1 - rates.d - rates.d_I - rates.c, 0.0, 0.0],
            [0.0, rates.c, 1 - rates.d_R - rates.g_R - rates.h, 0.0],
            [0.0, 0.0, rates.h, 1 - rates.d_R - rates.d_H],
        ]
    )
    return LinearModel(
        F=F,
        b=np.array([b, 0.0, 0.0, 0.0]),
        W=_default(noise, (4, 4)),
        B=_default(observation, (2, 4)),
        variant=ModelVariant.SIRH,
        rates=rates,
    )
