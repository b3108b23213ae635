import logging
import sys
from pathlib import Path
from typing import Optional, TextIO, Union

import numpy as np
from attrs import define, field, validators

from poisson_filter.control.config import RunConfig
from poisson_filter.evaluate.benchmark import compare_coverage, noise_sweep, run_filters
from poisson_filter.evaluate.metrics import (
    cumulative_deaths,
    last_year_deaths,
    zero_observation_fraction,
)
from poisson_filter.evaluate.objects import RmseTable
from poisson_filter.evaluate.report import (
    write_coverage_csv,
    write_deaths_csv,
    write_estimates_csv,
    write_rmse_csv,
    write_rmse_gnuplot,
)
from poisson_filter.exceptions import (
    PoissonFilterConfigException,
    PoissonFilterSimulationException,
)
from poisson_filter.filters.objects import FilterConfig, VarianceMode, fixed_variance
from poisson_filter.models.linear import (
    LinearModel,
    build_linear_sir,
    build_linear_sirh,
    observation_matrix,
)
from poisson_filter.models.nonlinear import NonlinearModel, build_contagious_sirh
from poisson_filter.models.objects import DerivedRates, FloatArray, ModelVariant, SteadyState
from poisson_filter.models.rates import annual_deaths, annual_incidence, derive_rates
from poisson_filter.models.steady_state import steady_state_closed_form, steady_state_numeric
from poisson_filter.simulate.export import format_float, write_trajectory_csv
from poisson_filter.simulate.objects import Scenario, Trajectory
from poisson_filter.simulate.simulator import run_scenario

logger = logging.getLogger(__name__)

Model = Union[LinearModel, NonlinearModel]


def _relative_difference(a: FloatArray, b: FloatArray) -> float:
    scale = np.maximum(np.abs(a), np.finfo(np.float64).tiny)
    return float(np.max(np.abs(a - b) / scale, initial=0.0))


@define(kw_only=True)
class Controller:
    """Runs the CLI subcommands for one validated RunConfig."""

    config: RunConfig = field(validator=validators.instance_of(RunConfig))
    out: TextIO = field(factory=lambda: sys.stdout, repr=False)

    _rates: Optional[DerivedRates] = field(default=None, init=False, repr=False)

    @classmethod
    def create_controller(cls, config: RunConfig, out: Optional[TextIO] = None) -> "Controller":
        logger.debug(f"Creating controller for scenario {config.scenario}")
        return cls(config=config, out=out or sys.stdout)

    @property
    def linear_variant(self) -> ModelVariant:
        """The noncontagious model the rates and closed forms belong to."""
        if self.config.variant is ModelVariant.SIRH_CONTAGIOUS:
            return ModelVariant.SIRH
        return self.config.variant

    @property
    def rates(self) -> DerivedRates:
        if self._rates is None:
            self._rates = derive_rates(self.config.inputs, self.linear_variant)
        return self._rates

    @property
    def output_dir(self) -> Path:
        return self.config.output_path

    def _print(self, line: str = "") -> None:
        print(line, file=self.out)

    def closed_form(self) -> SteadyState:
        return steady_state_closed_form(self.rates, self.config.inputs.b, self.linear_variant)

    def build_model(self) -> Model:
        """Model with the configured observation rates and unscaled W."""
        cfg = self.config
        dim = cfg.variant.dim
        c_I, c_H = cfg.observation.rates(cfg.inputs)
        B = observation_matrix(c_I, c_H, dim)
        W = np.diag(cfg.noise.w_diag) if cfg.noise.w_diag else np.zeros((dim, dim))
        b = cfg.inputs.b
        if cfg.variant is ModelVariant.SIR:
            return build_linear_sir(self.rates, b, observation=B, noise=W)
        if cfg.variant is ModelVariant.SIRH:
            return build_linear_sirh(self.rates, b, observation=B, noise=W)
        return build_contagious_sirh(self.rates, b, cfg.beta, observation=B, noise=W)

    def reference_state(self, reference: str, model: Model) -> FloatArray:
        if reference == "noncontagious":
            return self.closed_form().values
        if not isinstance(model, NonlinearModel):
            raise PoissonFilterConfigException(
                exception_message=(
                    f"the contagious equilibrium needs the sirh_contagious variant, "
                    f"got {self.config.variant.value}"
                )
            )
        return steady_state_numeric(model).values

    def initial_state(self, model: Model) -> FloatArray:
        initial = self.config.initial_state
        if initial == "zero":
            return np.zeros(model.dim)
        if initial == "equilibrium":
            return self.reference_state("noncontagious", model)
        if initial == "contagious_equilibrium":
            return self.reference_state("contagious", model)
        return np.asarray(initial, dtype=np.float64)

    def filter_configs(self, model: Model) -> dict[str, FilterConfig]:
        configs = {}
        for section in self.config.filters:
            v_const = None
            if section.v_mode is VarianceMode.FIXED:
                reference = self.reference_state(section.reference, model)
                v_const = fixed_variance(model.observation(0), reference, section.delta)
                logger.debug(f"Filter {section.name} uses fixed V diagonal {v_const}")
            configs[section.name] = FilterConfig(
                delta=section.delta,
                v_mode=section.v_mode,
                v_const=v_const,
                clamp_state=section.clamp_state,
            )
        return configs

    def simulate(self, model: Model, multiplier: float, trial: int = 0) -> Trajectory:
        return run_scenario(
            Scenario(
                model=model,
                initial_state=self.initial_state(model),
                n_steps=self.config.n_steps,
                noise_multiplier=multiplier,
                seed=self.config.seed,
                trial=trial,
                name=self.config.scenario,
            )
        )

    def _report_deaths(self, trajectory: Trajectory, prefix: str) -> Path:
        cumulative = cumulative_deaths(trajectory, self.rates)
        for cause, total in last_year_deaths(cumulative).items():
            self._print(f"{prefix}deaths over the final year ({cause}): {total:.6g}")
        return write_deaths_csv(cumulative, self.output_dir / f"{prefix}deaths.csv")

    def cmd_derive_params(self) -> Path:
        """Print the daily rates with 6 significant digits and write them to CSV."""
        logger.info(f"Deriving {self.linear_variant.value} rates for {self.config.scenario}")
        rates = self.rates.as_dict()
        for name, value in rates.items():
            self._print(f"{name:>4} = {value:.6g}")
        path = self.output_dir / "derived_rates.csv"
        lines = ["name,value", *(f"{name},{format_float(v)}" for name, v in rates.items())]
        self._write_text(path, "\n".join(lines) + "\n")
        return path

    def cmd_steady_state(self) -> Path:
        """Closed-form and numeric equilibria side by side."""
        logger.info(f"Computing steady states for {self.config.scenario}")
        model = self.build_model()
        closed = self.closed_form()
        numeric = steady_state_numeric(model)
        self._print(f"{'':>2} {'closed_form':>16} {'numeric':>16}")
        for name, a, b in zip(closed.components, closed.values, numeric.values):
            self._print(f"{name:>2} {a:16.6f} {b:16.6f}")
        if numeric.variant is closed.variant:
            difference = _relative_difference(closed.values, numeric.values)
            self._print(f"max relative difference: {difference:.3e}")
        else:
            self._print("numeric column is the contagious fixed point")
        self._print_annual(closed, "closed form")
        if numeric.variant is not closed.variant:
            self._print_annual(numeric, "contagious")

        path = self.output_dir / "steady_state.csv"
        lines = ["component,closed_form,numeric"]
        lines.extend(
            f"{name},{format_float(a)},{format_float(b)}"
            for name, a, b in zip(closed.components, closed.values, numeric.values)
        )
        self._write_text(path, "\n".join(lines) + "\n")
        return path

    def _print_annual(self, steady: SteadyState, label: str) -> None:
        if "H" in steady.components:
            incidence = annual_incidence(self.rates, steady)
            self._print(f"annual PIH incidence ({label}): {incidence:.6g}")
        for cause, deaths in annual_deaths(self.rates, steady).items():
            self._print(f"annual {cause} deaths ({label}): {deaths:.6g}")

    def cmd_simulate(self) -> list[Path]:
        """Write one trajectory per trial and print its zero-count statistics."""
        model = self.build_model()
        multiplier = self.config.noise.base_multiplier
        logger.info(
            f"Simulating {self.config.n_trials} trial(s) of {self.config.scenario} "
            f"for {self.config.n_steps} steps"
        )
        paths = []
        for trial in range(self.config.n_trials):
            trajectory = self.simulate(model, multiplier, trial)
            prefix = f"trial{trial}_"
            paths.append(
                write_trajectory_csv(trajectory, self.output_dir / f"{prefix}trajectory.csv")
            )
            for name, fraction in zero_observation_fraction(trajectory).items():
                self._print(f"{prefix}zero-count fraction ({name}): {fraction:.4f}")
            paths.append(self._report_deaths(trajectory, prefix))
        return paths

    def cmd_filter(self) -> list[Path]:
        """Run every configured filter on one shared trajectory; one estimates CSV each."""
        model = self.build_model()
        multiplier = self.config.noise.base_multiplier
        filters = self.filter_configs(model)
        logger.info(f"Filtering {self.config.scenario} with {', '.join(filters)}")
        trajectory = self.simulate(model, multiplier)
        outputs = run_filters(model, filters, [trajectory], noise_multiplier=multiplier)
        paths = [write_trajectory_csv(trajectory, self.output_dir / "trajectory.csv")]
        for name, output in outputs.items():
            paths.append(
                write_estimates_csv(trajectory, output, self.output_dir / f"estimates_{name}.csv")
            )
        reports = compare_coverage(trajectory, outputs, burn_in=self.config.burn_in)
        for name, report in reports.items():
            fractions = ", ".join(f"{c}={v:.3f}" for c, v in report.fractions.items())
            self._print(f"{name} 2-sigma coverage: {fractions}")
        paths.append(write_coverage_csv(reports, self.output_dir / "coverage.csv"))
        paths.append(self._report_deaths(trajectory, ""))
        return paths

    def cmd_benchmark(self) -> list[Path]:
        """Noise sweep RMSE table plus 2-sigma coverage at the base multiplier."""
        cfg = self.config
        model = self.build_model()
        filters = self.filter_configs(model)
        logger.info(
            f"Benchmarking {', '.join(filters)} over multipliers {list(cfg.noise.multipliers)}"
        )
        table = noise_sweep(
            model,
            filters,
            cfg.noise.multipliers,
            cfg.n_steps,
            cfg.seed,
            initial_state=self.initial_state(model),
            n_trials=cfg.n_trials,
            burn_in=cfg.burn_in,
            workers=cfg.workers,
        )
        self._print_table(table)
        paths = [write_rmse_csv(table, self.output_dir / "rmse.csv")]
        for component in table.components:
            paths.append(
                write_rmse_gnuplot(table, self.output_dir / f"rmse_{component}.dat", component)
            )

        multiplier = cfg.noise.base_multiplier
        trajectory = self.simulate(model, multiplier)
        outputs = run_filters(model, filters, [trajectory], noise_multiplier=multiplier)
        reports = compare_coverage(trajectory, outputs, burn_in=cfg.burn_in)
        paths.append(write_coverage_csv(reports, self.output_dir / "coverage.csv"))
        logger.info(f"Benchmark finished; wrote {len(paths)} files to {self.output_dir}")
        return paths

    def _print_table(self, table: RmseTable) -> None:
        for (name, multiplier, component), entry in table.entries.items():
            self._print(
                f"{name:>10} x{multiplier:<6g} {component}: "
                f"rmse={entry.mean:.6g} +- {entry.stderr:.2g}"
            )

    def _write_text(self, path: Path, text: str) -> None:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            raise PoissonFilterSimulationException(
                exception_message=f"could not write {path}: {e}"
            ) from e
        logger.info(f"Wrote {path}")
