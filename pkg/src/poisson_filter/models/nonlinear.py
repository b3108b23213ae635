import logging
from typing import Optional

import numpy as np
from attrs import evolve, field, frozen, validators

from poisson_filter.exceptions import PoissonFilterModelException
from poisson_filter.models.linear import LinearModel, Schedule, build_linear_sirh
from poisson_filter.models.objects import DerivedRates, FloatArray, ModelVariant

logger = logging.getLogger(__name__)


@frozen(kw_only=True)
class NonlinearModel:
    """Contagious SIRH: the linear SIRH map plus beta * S * I moved from S to I."""

    base: LinearModel = field(validator=validators.instance_of(LinearModel))
    beta: float = field(validator=validators.ge(0.0))

    def __attrs_post_init__(self) -> None:
        if self.base.dim != 4:
            raise PoissonFilterModelException(
                exception_message=f"the contagious model needs 4 states, got {self.base.dim}"
            )

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def components(self) -> tuple[str, ...]:
        return self.base.components

    @property
    def variant(self) -> ModelVariant:
        return ModelVariant.SIRH_CONTAGIOUS

    @property
    def rates(self) -> Optional[DerivedRates]:
        return self.base.rates

    @property
    def G(self) -> Optional[FloatArray]:
        return self.base.G

    @property
    def constant_noise(self) -> bool:
        return self.base.constant_noise

    def forcing(self, k: int) -> FloatArray:
        return self.base.forcing(k)

    def noise(self, k: int) -> FloatArray:
        return self.base.noise(k)

    def observation(self, k: int) -> FloatArray:
        return self.base.observation(k)

    def step(self, x: FloatArray, k: int, control: Optional[FloatArray] = None) -> FloatArray:
        """f_k: advance x_{k-1} to x_k without noise; ``x`` may carry leading batch axes."""
        out = self.base.step(x, k, control)
        flux = self.beta * x[..., 0] * x[..., 1]
        out[..., 0] -= flux
        out[..., 1] += flux
        return out

    def jacobian(self, x: FloatArray, k: int = 1) -> FloatArray:
        """Df_k evaluated at x, one matrix per leading batch index."""
        F = self.base.transition(k - 1)
        J = np.broadcast_to(F, x.shape[:-1] + F.shape).copy()
        S = x[..., 0]
        I = x[..., 1]  # noqa: E741
        J[..., 0, 0] -= self.beta * I
        J[..., 0, 1] -= self.beta * S
        J[..., 1, 0] += self.beta * I
        J[..., 1, 1] += self.beta * S
        return J

    def scaled_noise(self, multiplier: float) -> "NonlinearModel":
        return evolve(self, base=self.base.scaled_noise(multiplier))

    def with_observation(self, B: Schedule) -> "NonlinearModel":
        return evolve(self, base=self.base.with_observation(B))

    def with_noise(self, W: Schedule) -> "NonlinearModel":
        return evolve(self, base=self.base.with_noise(W))


def build_contagious_sirh(
    rates: DerivedRates,
    b: float,
    beta: float,
    *,
    observation: Optional[Schedule] = None,
    noise: Optional[Schedule] = None,
) -> NonlinearModel:
    if beta < 0:
        raise PoissonFilterModelException(
            exception_message=f"beta must be nonnegative, got {beta}"
        )
    base = build_linear_sirh(rates, b, observation=observation, noise=noise)
    return NonlinearModel(base=base, beta=beta)
