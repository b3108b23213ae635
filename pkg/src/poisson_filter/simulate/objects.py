import hashlib
import logging
from typing import Any, Union

import numpy as np
from attrs import field, frozen, validators
from numpy.typing import NDArray

from poisson_filter.exceptions import PoissonFilterModelException
from poisson_filter.filters.objects import Observation
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.nonlinear import NonlinearModel
from poisson_filter.models.objects import FloatArray
from poisson_filter.simulate.rng import MAX_SEED

logger = logging.getLogger(__name__)


@frozen(kw_only=True)
class Scenario:
    """A model run from a fixed initial state with W scaled by ``noise_multiplier``."""

    model: Union[LinearModel, NonlinearModel] = field(
        repr=False, validator=validators.instance_of((LinearModel, NonlinearModel))
    )
    initial_state: FloatArray = field(
        eq=False, converter=lambda v: np.asarray(v, dtype=np.float64)
    )
    n_steps: int = field(validator=[validators.instance_of(int), validators.ge(0)])
    noise_multiplier: float = field(default=1.0, validator=validators.ge(0.0))
    seed: int = field(
        default=0,
        validator=[validators.instance_of(int), validators.ge(0), validators.le(MAX_SEED)],
    )
    trial: int = field(default=0, validator=[validators.instance_of(int), validators.ge(0)])
    name: str = field(default="scenario")

    def __attrs_post_init__(self) -> None:
        if self.initial_state.shape != (self.model.dim,):
            raise PoissonFilterModelException(
                exception_message=(
                    f"initial state must have shape ({self.model.dim},), "
                    f"got {self.initial_state.shape}"
                )
            )


@frozen(kw_only=True)
class Trajectory:
    """Truth, Poisson rates and counts for steps 0..n_steps (row k is step k)."""

    truth: FloatArray = field(eq=False)
    rates: FloatArray = field(eq=False)
    counts: NDArray[np.int64] = field(eq=False)
    seed: int
    components: tuple[str, ...]
    observed: tuple[str, ...]
    meta: dict[str, Any] = field(factory=dict)

    def __attrs_post_init__(self) -> None:
        if not len(self.truth) == len(self.rates) == len(self.counts):
            raise PoissonFilterModelException(
                exception_message="truth, rates and counts must have equal lengths"
            )

    @property
    def n_steps(self) -> int:
        return len(self.truth) - 1

    @property
    def observations(self) -> list[Observation]:
        return [Observation(counts, k) for k, counts in enumerate(self.counts)]

    def digest(self) -> str:
        """Hash of the truth and count data, equal for bitwise-identical trajectories."""
        sha = hashlib.sha256()
        sha.update(np.ascontiguousarray(self.truth).tobytes())
        sha.update(np.ascontiguousarray(self.counts).tobytes())
        return sha.hexdigest()
