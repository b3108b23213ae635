import numpy as np
import pytest

from poisson_filter.exceptions import PoissonFilterSimulationException
from poisson_filter.simulate.export import format_float, trajectory_header, write_trajectory_csv
from poisson_filter.simulate.objects import Scenario
from poisson_filter.simulate.simulator import run_scenario


@pytest.fixture
def trajectory(sirh_model, sirh_steady_state):
    return run_scenario(
        Scenario(model=sirh_model, initial_state=sirh_steady_state.values, n_steps=20, seed=3)
    )


def test_format_float_round_trips():
    for value in (0.1, 1 / 3, 121422.05323213, 1e-300, 0.0):
        assert float(format_float(value)) == value


def test_header(trajectory):
    assert trajectory_header(trajectory) == [
        "step",
        "S",
        "I",
        "R",
        "H",
        "lambda_I",
        "lambda_H",
        "y_I",
        "y_H",
    ]


def test_write_trajectory_csv(trajectory, tmp_path):
    path = write_trajectory_csv(trajectory, tmp_path / "nested" / "trajectory.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "step,S,I,R,H,lambda_I,lambda_H,y_I,y_H"
    assert len(lines) == 22
    first = lines[1].split(",")
    assert first[0] == "0"
    np.testing.assert_array_equal([float(v) for v in first[1:5]], trajectory.truth[0])
    assert [int(v) for v in first[7:]] == list(trajectory.counts[0])


def test_rewrites_are_byte_identical(trajectory, tmp_path):
    a = write_trajectory_csv(trajectory, tmp_path / "a.csv").read_bytes()
    b = write_trajectory_csv(trajectory, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_unwritable_destination(trajectory, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(PoissonFilterSimulationException):
        write_trajectory_csv(trajectory, blocker / "trajectory.csv")
