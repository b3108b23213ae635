import csv
import logging
from pathlib import Path

from poisson_filter.exceptions import PoissonFilterSimulationException
from poisson_filter.simulate.objects import Trajectory

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return f"{float(value):.17g}"


def trajectory_header(trajectory: Trajectory) -> list[str]:
    return [
        "step",
        *trajectory.components,
        *(f"lambda_{name}" for name in trajectory.observed),
        *(f"y_{name}" for name in trajectory.observed),
    ]


def write_trajectory_csv(trajectory: Trajectory, path: Path) -> Path:
    """One row per step: step, states, Poisson rates, observed counts."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(trajectory_header(trajectory))
            for k in range(len(trajectory.truth)):
                writer.writerow(
                    [
                        k,
                        *(format_float(v) for v in trajectory.truth[k]),
                        *(format_float(v) for v in trajectory.rates[k]),
                        *(int(c) for c in trajectory.counts[k]),
                    ]
                )
    except OSError as e:
        raise PoissonFilterSimulationException(
            exception_message=f"could not write trajectory to {path}: {e}"
        ) from e
    logger.info(f"Wrote trajectory with {trajectory.n_steps} steps to {path}")
    return path
