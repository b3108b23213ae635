import logging
from enum import Enum
from typing import Any, Optional

import numpy as np
from attrs import field, frozen, validators
from numpy.typing import NDArray

from poisson_filter.exceptions import PoissonFilterModelException

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

SIR_COMPONENTS: tuple[str, ...] = ("S", "I", "R")
SIRH_COMPONENTS: tuple[str, ...] = ("S", "I", "R", "H")


class ModelVariant(str, Enum):
    """Compartmental model family."""

    SIR = "sir"
    SIRH = "sirh"
    SIRH_CONTAGIOUS = "sirh_contagious"

    @property
    def components(self) -> tuple[str, ...]:
        return SIR_COMPONENTS if self is ModelVariant.SIR else SIRH_COMPONENTS

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def observed(self) -> tuple[str, ...]:
        return ("I",) if self is ModelVariant.SIR else ("I", "H")


def _nonnegative(instance: Any, attribute: Any, value: Optional[float]) -> None:
    if value is not None and not value >= 0:
        raise PoissonFilterModelException(
            exception_message=f"{attribute.name} must be nonnegative, got {value}"
        )


def _fraction(instance: Any, attribute: Any, value: Optional[float]) -> None:
    if value is not None and not 0.0 <= value <= 1.0:
        raise PoissonFilterModelException(
            exception_message=f"{attribute.name} must lie in [0, 1], got {value}"
        )


@frozen(kw_only=True)
class EpidemiologicalInputs:
    """Population-level statistics the daily rates are derived from.

    Mortality and incidence figures are fractions per live birth over the stated
    period (0.029 for 29 per 1000 live births).
    """

    T_S: float = field(validator=_nonnegative)
    T_i: float = field(validator=_nonnegative)
    b: float = field(validator=_nonnegative)
    m_1: float = field(validator=_fraction)
    s: float = field(validator=_fraction)
    a_raw: float = field(validator=_fraction)
    m_2: float = field(validator=_fraction)
    p: Optional[float] = field(default=None, validator=_fraction)
    d_H_frac: Optional[float] = field(default=None, validator=_fraction)

    def __attrs_post_init__(self) -> None:
        if self.T_S <= 0:
            raise PoissonFilterModelException(
                exception_message=f"T_S must be positive, got {self.T_S}"
            )
        if self.T_i <= self.T_S:
            raise PoissonFilterModelException(
                exception_message=(
                    f"T_i must exceed T_S (T_R = T_i - T_S > 0), got T_S={self.T_S}, "
                    f"T_i={self.T_i}"
                )
            )
        if self.m_1 > self.m_2:
            raise PoissonFilterModelException(
                exception_message=f"m_1 must not exceed m_2, got m_1={self.m_1}, m_2={self.m_2}"
            )

    @property
    def T_R(self) -> float:
        return self.T_i - self.T_S


@frozen(kw_only=True)
class DerivedRates:
    """Daily transition rates of the SIR/SIRH models."""

    g_S: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    g_R: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    a: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    d: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    d_I: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    d_R: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    c: float = field(validator=[validators.ge(0.0), validators.lt(1.0)])
    h: float = field(default=0.0, validator=[validators.ge(0.0), validators.lt(1.0)])
    d_H: float = field(default=0.0, validator=[validators.ge(0.0), validators.lt(1.0)])
    T_R: float = field(default=0.0, validator=validators.ge(0.0))

    def as_dict(self) -> dict[str, float]:
        return {
            "g_S": self.g_S,
            "g_R": self.g_R,
            "a": self.a,
            "d": self.d,
            "d_I": self.d_I,
            "d_R": self.d_R,
            "c": self.c,
            "h": self.h,
            "d_H": self.d_H,
            "T_R": self.T_R,
        }


@frozen
class SteadyState:
    """Equilibrium population of every compartment."""

    values: FloatArray = field(eq=False, converter=lambda v: np.asarray(v, dtype=np.float64))
    variant: ModelVariant = field(validator=validators.instance_of(ModelVariant))

    @property
    def components(self) -> tuple[str, ...]:
        return self.variant.components

    def as_dict(self) -> dict[str, float]:
        return {name: float(value) for name, value in zip(self.components, self.values)}

    def __getitem__(self, name: str) -> float:
        return self.as_dict()[name]
