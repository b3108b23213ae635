import csv
import logging
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from poisson_filter.evaluate.benchmark import FilterOutput
from poisson_filter.evaluate.objects import CoverageReport, RmseTable
from poisson_filter.exceptions import PoissonFilterSimulationException
from poisson_filter.models.objects import FloatArray
from poisson_filter.simulate.export import format_float
from poisson_filter.simulate.objects import Trajectory

logger = logging.getLogger(__name__)

RMSE_HEADER = ["filter", "noise_multiplier", "component", "rmse", "stderr", "n_trials"]
COVERAGE_HEADER = ["filter", "component", "coverage", "n_steps"]
ESTIMATES_HEADER = ["step", "component", "truth", "estimate", "P_diag", "observation"]


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise PoissonFilterSimulationException(
            exception_message=f"could not write {path}: {e}"
        ) from e
    logger.info(f"Wrote {path}")
    return path


def write_rmse_csv(table: RmseTable, path: Path) -> Path:
    """Long-format RMSE table, one row per (filter, multiplier, component)."""
    rows = [
        [
            name,
            format_float(multiplier),
            component,
            format_float(entry.mean),
            format_float(entry.stderr),
            table.n_trials,
        ]
        for (name, multiplier, component), entry in table.entries.items()
    ]
    return _write_rows(path, RMSE_HEADER, rows)


def write_rmse_gnuplot(table: RmseTable, path: Path, component: str) -> Path:
    """Whitespace-separated columns: multiplier, then mean RMSE of each filter."""
    filters = table.filters
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            handle.write("# noise_multiplier " + " ".join(filters) + f"  ({component})\n")
            for multiplier in table.multipliers:
                values = [
                    format_float(table.get(name, multiplier, component).mean)
                    for name in filters
                ]
                handle.write(" ".join([format_float(multiplier), *values]) + "\n")
    except OSError as e:
        raise PoissonFilterSimulationException(
            exception_message=f"could not write {path}: {e}"
        ) from e
    logger.info(f"Wrote gnuplot data for {component} to {path}")
    return path


def write_coverage_csv(reports: Mapping[str, CoverageReport], path: Path) -> Path:
    rows = [
        [name, component, format_float(fraction), report.n_steps]
        for name, report in reports.items()
        for component, fraction in report.fractions.items()
    ]
    return _write_rows(path, COVERAGE_HEADER, rows)


def write_estimates_csv(trajectory: Trajectory, output: FilterOutput, path: Path) -> Path:
    """One row per (step, component) for steps 1..n.

    The observation column holds the count of the component's own observation and is
    empty for unobserved components.
    """
    n_rows = trajectory.n_steps + 1
    means = output.means.reshape(n_rows, -1)
    variances = output.variances.reshape(n_rows, -1)
    observed = {name: i for i, name in enumerate(trajectory.observed)}
    rows = []
    for k in range(1, n_rows):
        for i, component in enumerate(trajectory.components):
            count = (
                int(trajectory.counts[k, observed[component]]) if component in observed else ""
            )
            rows.append(
                [
                    k,
                    component,
                    format_float(trajectory.truth[k, i]),
                    format_float(means[k, i]),
                    format_float(variances[k, i]),
                    count,
                ]
            )
    return _write_rows(path, ESTIMATES_HEADER, rows)


def write_deaths_csv(cumulative: Mapping[str, FloatArray], path: Path) -> Path:
    causes = list(cumulative)
    n_rows = len(next(iter(cumulative.values()))) if causes else 0
    rows = [
        [k, *(format_float(cumulative[cause][k]) for cause in causes)] for k in range(n_rows)
    ]
    return _write_rows(path, ["step", *(f"cumulative_{cause}" for cause in causes)], rows)
