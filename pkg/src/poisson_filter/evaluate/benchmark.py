import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from attrs import frozen

from poisson_filter.exceptions import PoissonFilterConfigException
from poisson_filter.evaluate.metrics import coverage_2sigma, rmse
from poisson_filter.evaluate.objects import CoverageReport, RmseEntry, RmseKey, RmseTable
from poisson_filter.filters.objects import (
    DEFAULT_P0_SCALE,
    FilterConfig,
    Observation,
    initial_estimate,
)
from poisson_filter.filters.runner import make_filter
from poisson_filter.models.linear import LinearModel
from poisson_filter.models.nonlinear import NonlinearModel
from poisson_filter.models.objects import FloatArray
from poisson_filter.simulate.objects import Scenario, Trajectory
from poisson_filter.simulate.simulator import run_scenario

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN = 1000

Model = Union[LinearModel, NonlinearModel]


@frozen
class FilterOutput:
    """Posterior means and covariance diagonals of one filter over a trajectory."""

    means: FloatArray
    variances: FloatArray


def effective_burn_in(burn_in: int, n_steps: int) -> int:
    if burn_in >= n_steps:
        logger.warning(f"Burn-in of {burn_in} leaves no steps out of {n_steps}; using 0.")
        return 0
    return burn_in


def run_filters(
    model: Model,
    filters: Mapping[str, FilterConfig],
    trajectories: Sequence[Trajectory],
    *,
    noise_multiplier: float = 1.0,
    p0_scale: float = DEFAULT_P0_SCALE,
) -> dict[str, FilterOutput]:
    """Run every filter on the same trajectories, stacked along a trial axis.

    Each filter starts at the true initial state with P_0 = p0_scale * I and assimilates
    the observations of steps 1..n. Outputs have shape (n + 1, n_trials, dim).
    """
    truth = np.stack([t.truth for t in trajectories], axis=1)
    counts = np.stack([t.counts for t in trajectories], axis=1)
    observations = [Observation(counts[k], k) for k in range(1, len(counts))]
    filter_model = model.scaled_noise(noise_multiplier)
    outputs = {}
    for name, cfg in filters.items():
        initial = initial_estimate(truth[0], p0_scale=p0_scale)
        means, variances = make_filter(filter_model, cfg).history(
            initial, observations, list(truth[1:])
        )
        outputs[name] = FilterOutput(means, variances)
    return outputs


def _grid_point(
    model: Model,
    filters: Mapping[str, FilterConfig],
    multiplier: float,
    initial_state: FloatArray,
    n_steps: int,
    n_trials: int,
    seed: int,
    burn_in: int,
    p0_scale: float,
) -> tuple[dict[RmseKey, RmseEntry], dict[tuple[float, int], str]]:
    logger.info(f"Noise multiplier {multiplier}: {n_trials} trials of {n_steps} steps")
    trajectories = [
        run_scenario(
            Scenario(
                model=model,
                initial_state=initial_state,
                n_steps=n_steps,
                noise_multiplier=multiplier,
                seed=seed,
                trial=trial,
                name="noise_sweep",
            )
        )
        for trial in range(n_trials)
    ]
    digests = {(multiplier, trial): t.digest() for trial, t in enumerate(trajectories)}
    outputs = run_filters(
        model, filters, trajectories, noise_multiplier=multiplier, p0_scale=p0_scale
    )
    truth = np.stack([t.truth for t in trajectories], axis=1)
    entries = {}
    for name, output in outputs.items():
        for index, component in enumerate(model.components):
            per_trial = tuple(
                rmse(output.means[1:, trial], truth[1:, trial], index, burn_in=burn_in)
                for trial in range(n_trials)
            )
            stderr = float(np.std(per_trial, ddof=1) / np.sqrt(n_trials)) if n_trials > 1 else 0.0
            entries[(name, multiplier, component)] = RmseEntry(
                mean=float(np.mean(per_trial)), stderr=stderr, per_trial=per_trial
            )
    return entries, digests


def noise_sweep(
    model: Model,
    filters: Mapping[str, FilterConfig],
    multipliers: Sequence[float],
    n_steps: int,
    seed: int,
    *,
    initial_state: FloatArray,
    n_trials: int = 1,
    burn_in: int = DEFAULT_BURN_IN,
    p0_scale: float = DEFAULT_P0_SCALE,
    workers: int = 1,
) -> RmseTable:
    """RMSE of every filter at every noise multiplier on shared per-trial data.

    Trial t uses the random stream (seed, t) at every multiplier. With ``workers`` > 1
    the grid points run in separate processes; the table does not depend on their
    completion order.
    """
    if any(not m >= 0 for m in multipliers):
        raise PoissonFilterConfigException(
            exception_message=f"noise multipliers must be nonnegative, got {list(multipliers)}"
        )
    burn_in = effective_burn_in(burn_in, n_steps)
    initial = np.asarray(initial_state, dtype=np.float64)
    arguments = [
        (model, filters, m, initial, n_steps, n_trials, seed, burn_in, p0_scale)
        for m in multipliers
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_grid_point, *zip(*arguments)))
    else:
        results = [_grid_point(*args) for args in arguments]

    entries: dict[RmseKey, RmseEntry] = {}
    digests: dict[tuple[float, int], str] = {}
    for point_entries, point_digests in results:
        entries.update(point_entries)
        digests.update(point_digests)
    order = {component: i for i, component in enumerate(model.components)}
    ordered = {
        key: entries[key] for key in sorted(entries, key=lambda k: (k[1], k[0], order[k[2]]))
    }
    return RmseTable(
        entries=ordered,
        n_steps=n_steps,
        n_trials=n_trials,
        seed=seed,
        burn_in=burn_in,
        digests=digests,
    )


def compare_coverage(
    trajectory: Trajectory,
    outputs: Mapping[str, FilterOutput],
    *,
    burn_in: int = 0,
    components: Optional[Sequence[str]] = None,
) -> dict[str, CoverageReport]:
    """2-sigma coverage of each filter's posteriors against the truth, steps 1..n."""
    burn_in = effective_burn_in(burn_in, trajectory.n_steps)
    names = list(components or trajectory.components)
    indices = [list(trajectory.components).index(name) for name in names]
    reports = {}
    for filter_name, output in outputs.items():
        means = output.means[1:, ..., indices].reshape(trajectory.n_steps, len(indices))
        variances = output.variances[1:, ..., indices].reshape(trajectory.n_steps, len(indices))
        reports[filter_name] = coverage_2sigma(
            (means, variances),
            trajectory.truth[1:, indices],
            components=names,
            burn_in=burn_in,
            filter_name=filter_name,
        )
    return reports
