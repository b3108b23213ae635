import json
from datetime import datetime
from typing import Any, Optional

from attrs import asdict, define, field

EXIT_SUCCESS = 0
EXIT_SYSTEM_ERROR = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


@define(kw_only=True)
class PoissonFilterException(Exception):
    exception_timestamp: float = field(factory=lambda: datetime.now().timestamp())
    exception_message: str = field(init=True, repr=True)
    exception_status: int = field(default=EXIT_SYSTEM_ERROR)
    exception_component: Optional[str] = field(default=None, init=True, repr=True)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def __str__(self) -> str:
        return json.dumps(self.to_dict(), indent=4)

    def __repr__(self) -> str:
        return json.dumps(self.to_dict(), indent=4)


@define(kw_only=True)
class PoissonFilterConfigException(PoissonFilterException):
    exception_status: int = field(default=EXIT_CONFIG_ERROR)
    exception_component: str = field(default="Config", init=True, repr=True)


@define(kw_only=True)
class PoissonFilterModelException(PoissonFilterException):
    exception_status: int = field(default=EXIT_CONFIG_ERROR)
    exception_component: str = field(default="Model", init=True, repr=True)


@define(kw_only=True)
class PoissonFilterNumericalException(PoissonFilterException):
    exception_status: int = field(default=EXIT_NUMERICAL_ERROR)
    exception_component: str = field(default="Numerical", init=True, repr=True)
    step: Optional[int] = field(default=None, init=True, repr=True)


@define(kw_only=True)
class PoissonFilterSimulationException(PoissonFilterException):
    exception_status: int = field(default=EXIT_NUMERICAL_ERROR)
    exception_component: str = field(default="Simulation", init=True, repr=True)


@define(kw_only=True)
class PoissonFilterSystemException(PoissonFilterException):
    exception_status: int = field(default=EXIT_SYSTEM_ERROR)
    exception_component: str = field(default="System", init=True, repr=True)
