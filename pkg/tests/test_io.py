import json

import pytest

from qpflow.services.io import atomic_writer, series_bundle_json, trajectory_csv, write_trajectory_csv
from qpflow.services.series_engine import SeriesBundle, Trajectory, TrajectoryMeta


@pytest.fixture
def trajectory():
    return Trajectory(
        times=[0.0, 0.1, 0.30000000000000004],
        states=[[1.0, 2.0], [1.0 / 3.0, 2.5], [0.125, 1e-20]],
        meta=TrajectoryMeta(method="taylor", order=10, tol=1e-10, accepted=2),
    )


def test_trajectory_csv_layout(trajectory):
    lines = trajectory_csv(trajectory).splitlines()
    assert lines[0] == "t,x1,x2"
    assert len(lines) == 4
    assert lines[2] == "0.10000000000000001,0.33333333333333331,2.5"
    assert lines[3].startswith("0.30000000000000004,")


def test_trajectory_csv_keeps_full_precision(trajectory, tmp_path):
    path = tmp_path / "out" / "traj.csv"
    write_trajectory_csv(trajectory, path)
    rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
    assert float(rows[1][1]) == 1.0 / 3.0
    assert float(rows[2][2]) == 1e-20


def test_series_bundle_json():
    doc = json.loads(series_bundle_json(SeriesBundle(t0=1.5, coeffs=[[1.0, 2.0, 3.0]])))
    assert doc == {"t0": 1.5, "order": 2, "coeffs": [[1.0, 2.0, 3.0]]}


def test_atomic_writer_leaves_nothing_behind_on_failure(tmp_path):
    target = tmp_path / "result.csv"
    target.write_text("old\n")
    with pytest.raises(RuntimeError):
        with atomic_writer(target) as handle:
            handle.write("partial")
            raise RuntimeError("interrupted")
    assert target.read_text() == "old\n"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["result.csv"]
