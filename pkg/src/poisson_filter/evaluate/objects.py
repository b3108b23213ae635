import logging
from typing import Optional

from attrs import field, frozen, validators

from poisson_filter.exceptions import PoissonFilterModelException

logger = logging.getLogger(__name__)

RmseKey = tuple[str, float, str]


@frozen(kw_only=True)
class RmseEntry:
    """RMSE of one (filter, noise multiplier, component) cell, averaged over trials."""

    mean: float = field(validator=validators.ge(0.0))
    stderr: float = field(validator=validators.ge(0.0))
    per_trial: tuple[float, ...] = field(factory=tuple)


@frozen(kw_only=True)
class RmseTable:
    """Benchmark results keyed by (filter name, noise multiplier, component)."""

    entries: dict[RmseKey, RmseEntry] = field(factory=dict)
    n_steps: int = field(validator=validators.ge(0))
    n_trials: int = field(validator=validators.ge(1))
    seed: int = field(validator=validators.ge(0))
    burn_in: int = field(default=0, validator=validators.ge(0))
    digests: dict[tuple[float, int], str] = field(factory=dict)

    def get(self, filter_name: str, multiplier: float, component: str) -> RmseEntry:
        return self.entries[(filter_name, multiplier, component)]

    @property
    def filters(self) -> list[str]:
        return list(dict.fromkeys(key[0] for key in self.entries))

    @property
    def multipliers(self) -> list[float]:
        return sorted(set(key[1] for key in self.entries))

    @property
    def components(self) -> list[str]:
        return list(dict.fromkeys(key[2] for key in self.entries))

    def is_complete(self) -> bool:
        return all(
            (name, multiplier, component) in self.entries
            for name in self.filters
            for multiplier in self.multipliers
            for component in self.components
        )


@frozen(kw_only=True)
class CoverageReport:
    """Fraction of steps whose truth lies within two standard deviations of the estimate."""

    fractions: dict[str, float] = field(factory=dict)
    n_steps: int = field(validator=validators.ge(0))
    filter_name: Optional[str] = field(default=None)

    def __attrs_post_init__(self) -> None:
        for name, value in self.fractions.items():
            if not 0.0 <= value <= 1.0:
                raise PoissonFilterModelException(
                    exception_message=f"coverage of {name} must lie in [0, 1], got {value}"
                )

    def __getitem__(self, component: str) -> float:
        return self.fractions[component]
