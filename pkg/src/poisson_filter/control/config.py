import logging
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import attrs
import yaml
from attrs import field, frozen, validators

from poisson_filter.exceptions import PoissonFilterConfigException
from poisson_filter.filters.objects import DEFAULT_DELTA, VarianceMode
from poisson_filter.models.objects import EpidemiologicalInputs, ModelVariant

logger = logging.getLogger(__name__)

PRESETS = ("uganda_sir", "uganda_sirh", "contagious", "contagious_lowrate")
INITIAL_STATES = ("zero", "equilibrium", "contagious_equilibrium")
REFERENCES = ("noncontagious", "contagious")

InitialState = Union[str, tuple[float, ...]]


def _number(value: Any) -> float:
    """Accept plain numbers and ratios written as "7/29"."""
    if isinstance(value, bool):
        raise PoissonFilterConfigException(exception_message=f"expected a number, got {value}")
    if isinstance(value, str):
        try:
            return float(Fraction(value.replace(" ", "")))
        except (ValueError, ZeroDivisionError) as e:
            raise PoissonFilterConfigException(
                exception_message=f"could not read {value!r} as a number"
            ) from e
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise PoissonFilterConfigException(
            exception_message=f"could not read {value!r} as a number"
        ) from e


def _optional_number(value: Any) -> Optional[float]:
    return None if value is None else _number(value)


def _numbers(value: Any) -> tuple[float, ...]:
    if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
        return (_number(value),)
    return tuple(_number(v) for v in value)


def _initial_state(value: Any) -> InitialState:
    if isinstance(value, str):
        return value
    return _numbers(value)


def _check_keys(section: str, data: Mapping[str, Any], allowed: set[str]) -> None:
    if not isinstance(data, Mapping):
        raise PoissonFilterConfigException(
            exception_message=f"section {section!r} must be a mapping, got {type(data).__name__}"
        )
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise PoissonFilterConfigException(
            exception_message=f"unknown key(s) in {section}: {', '.join(map(str, unknown))}"
        )


def _field_names(cls: type) -> set[str]:
    return {a.name for a in attrs.fields(cls)}


@frozen(kw_only=True)
class ObservationSection:
    """Observation rates, either absolute or as fractions of 1/T_S and 1/T_R."""

    c_I: Optional[float] = field(default=None, converter=_optional_number)
    c_H: Optional[float] = field(default=None, converter=_optional_number)
    c_I_fraction: Optional[float] = field(default=None, converter=_optional_number)
    c_H_fraction: Optional[float] = field(default=None, converter=_optional_number)

    def __attrs_post_init__(self) -> None:
        if self.c_I is not None and self.c_I_fraction is not None:
            raise PoissonFilterConfigException(
                exception_message="give either c_I or c_I_fraction, not both"
            )
        if self.c_H is not None and self.c_H_fraction is not None:
            raise PoissonFilterConfigException(
                exception_message="give either c_H or c_H_fraction, not both"
            )

    def rates(self, inputs: EpidemiologicalInputs) -> tuple[float, float]:
        """Absolute daily (c_I, c_H); unspecified rates are zero."""
        c_I = self.c_I
        if c_I is None:
            c_I = (self.c_I_fraction or 0.0) / inputs.T_S
        c_H = self.c_H
        if c_H is None:
            c_H = (self.c_H_fraction or 0.0) / inputs.T_R
        return c_I, c_H


@frozen(kw_only=True)
class NoiseSection:
    w_diag: tuple[float, ...] = field(factory=tuple, converter=_numbers)
    multipliers: tuple[float, ...] = field(default=(1.0,), converter=_numbers)

    def __attrs_post_init__(self) -> None:
        if any(w < 0 for w in self.w_diag):
            raise PoissonFilterConfigException(
                exception_message=f"w_diag entries must be nonnegative, got {self.w_diag}"
            )
        if not self.multipliers or any(m < 0 for m in self.multipliers):
            raise PoissonFilterConfigException(
                exception_message=f"multipliers must be nonnegative, got {self.multipliers}"
            )

    @property
    def base_multiplier(self) -> float:
        """Multiplier used by single-trajectory commands: 1 when swept, else the first."""
        return 1.0 if 1.0 in self.multipliers else self.multipliers[0]


@frozen(kw_only=True)
class FilterSection:
    """One filter variant of a run; ``reference`` picks the state behind a fixed V."""

    name: str = field(validator=validators.instance_of(str))
    v_mode: VarianceMode = field(default=VarianceMode.PREDICTED, converter=VarianceMode)
    delta: float = field(default=DEFAULT_DELTA, converter=_number, validator=validators.gt(0.0))
    reference: str = field(default="noncontagious", validator=validators.in_(REFERENCES))
    clamp_state: bool = field(default=True, validator=validators.instance_of(bool))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "v_mode": self.v_mode.value,
            "delta": self.delta,
            "reference": self.reference,
            "clamp_state": self.clamp_state,
        }


DEFAULT_FILTERS = (
    FilterSection(name="pkf"),
    FilterSection(name="kf", v_mode=VarianceMode.FIXED),
    FilterSection(name="oracle", v_mode=VarianceMode.ORACLE),
)


@frozen(kw_only=True)
class RunConfig:
    """Everything a subcommand needs, validated before any computation starts."""

    scenario: str = field(default="custom", validator=validators.instance_of(str))
    variant: ModelVariant = field(default=ModelVariant.SIRH, converter=ModelVariant)
    inputs: EpidemiologicalInputs = field(
        validator=validators.instance_of(EpidemiologicalInputs)
    )
    beta: float = field(default=0.0, converter=_number, validator=validators.ge(0.0))
    observation: ObservationSection = field(factory=ObservationSection)
    noise: NoiseSection = field(factory=NoiseSection)
    filters: tuple[FilterSection, ...] = field(default=DEFAULT_FILTERS, converter=tuple)
    initial_state: InitialState = field(default="equilibrium", converter=_initial_state)
    n_steps: int = field(default=1000, validator=[validators.instance_of(int), validators.ge(0)])
    n_trials: int = field(default=1, validator=[validators.instance_of(int), validators.ge(1)])
    seed: int = field(
        default=0,
        validator=[validators.instance_of(int), validators.ge(0), validators.le(2**64 - 1)],
    )
    burn_in: int = field(default=1000, validator=[validators.instance_of(int), validators.ge(0)])
    workers: int = field(default=1, validator=[validators.instance_of(int), validators.ge(1)])
    output_dir: str = field(default="results", converter=str)

    def __attrs_post_init__(self) -> None:
        if self.noise.w_diag and len(self.noise.w_diag) != self.variant.dim:
            raise PoissonFilterConfigException(
                exception_message=(
                    f"w_diag has {len(self.noise.w_diag)} entries; "
                    f"{self.variant.value} has {self.variant.dim} states"
                )
            )
        if isinstance(self.initial_state, str):
            if self.initial_state not in INITIAL_STATES:
                raise PoissonFilterConfigException(
                    exception_message=(
                        f"initial_state must be one of {', '.join(INITIAL_STATES)} "
                        f"or a list of {self.variant.dim} numbers, got {self.initial_state!r}"
                    )
                )
        elif len(self.initial_state) != self.variant.dim:
            raise PoissonFilterConfigException(
                exception_message=(
                    f"initial_state has {len(self.initial_state)} entries; "
                    f"{self.variant.value} has {self.variant.dim} states"
                )
            )
        names = [f.name for f in self.filters]
        if len(set(names)) != len(names):
            raise PoissonFilterConfigException(
                exception_message=f"filter names must be unique, got {names}"
            )
        if self.variant is not ModelVariant.SIRH_CONTAGIOUS and self.beta > 0:
            logger.warning(f"beta={self.beta} is ignored by the {self.variant.value} model")

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir)

    def override(self, **changes: Any) -> "RunConfig":
        """Copy with every non-None keyword replacing the matching field."""
        changes = {name: value for name, value in changes.items() if value is not None}
        if not changes:
            return self
        logger.debug(f"Overriding config values {changes}")
        try:
            return attrs.evolve(self, **changes)
        except (TypeError, ValueError) as e:
            raise PoissonFilterConfigException(
                exception_message=f"invalid override {changes}: {e}"
            ) from e

    def to_dict(self) -> dict[str, Any]:
        initial: Any = self.initial_state
        if not isinstance(initial, str):
            initial = list(initial)
        return {
            "scenario": self.scenario,
            "variant": self.variant.value,
            "inputs": attrs.asdict(self.inputs),
            "beta": self.beta,
            "observation": attrs.asdict(self.observation),
            "noise": {
                "w_diag": list(self.noise.w_diag),
                "multipliers": list(self.noise.multipliers),
            },
            "filters": [f.to_dict() for f in self.filters],
            "initial_state": initial,
            "n_steps": self.n_steps,
            "n_trials": self.n_trials,
            "seed": self.seed,
            "burn_in": self.burn_in,
            "workers": self.workers,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RunConfig":
        _check_keys("config", data, _field_names(cls))
        if "inputs" not in data:
            raise PoissonFilterConfigException(exception_message="config is missing 'inputs'")
        values = dict(data)
        try:
            _check_keys("inputs", data["inputs"], _field_names(EpidemiologicalInputs))
            values["inputs"] = EpidemiologicalInputs(
                **{k: _optional_number(v) for k, v in data["inputs"].items()}
            )
            if "observation" in data:
                _check_keys("observation", data["observation"], _field_names(ObservationSection))
                values["observation"] = ObservationSection(**data["observation"])
            if "noise" in data:
                _check_keys("noise", data["noise"], _field_names(NoiseSection))
                values["noise"] = NoiseSection(**data["noise"])
            if "filters" in data:
                filters = []
                for i, entry in enumerate(data["filters"] or []):
                    _check_keys(f"filters[{i}]", entry, _field_names(FilterSection))
                    filters.append(FilterSection(**entry))
                if not filters:
                    raise PoissonFilterConfigException(
                        exception_message="filters must name at least one filter"
                    )
                values["filters"] = tuple(filters)
            return cls(**values)
        except (TypeError, ValueError) as e:
            raise PoissonFilterConfigException(exception_message=f"invalid config: {e}") from e


def load_config(path: Path) -> RunConfig:
    logger.debug(f"Loading config from {path}")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise PoissonFilterConfigException(
            exception_message=f"could not read config {path}: {e}"
        ) from e
    return parse_config(text, source=str(path))


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise PoissonFilterConfigException(
            exception_message=f"could not parse {source}: {e}"
        ) from e
    if not isinstance(data, Mapping):
        raise PoissonFilterConfigException(
            exception_message=f"{source} must contain a mapping at the top level"
        )
    return RunConfig.from_dict(data)


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise PoissonFilterConfigException(
            exception_message=f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}"
        )
    logger.debug(f"Loading bundled preset {name}")
    text = resources.files("poisson_filter.presets").joinpath(f"{name}.yaml").read_text(
        encoding="utf-8"
    )
    return parse_config(text, source=f"preset {name}")


def dump_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)
