"""
File output: trajectory and coefficient tables, series JSON, atomic writes
"""

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, List, Union

import pandas as pd
from pydantic import BaseModel

from qpflow.services.series_engine import SeriesBundle, Trajectory

FLOAT_FORMAT = "%.17g"
PathLike = Union[str, os.PathLike]


class SeriesBundleFile(BaseModel):
    """JSON layout of a SeriesBundle"""

    t0: float
    order: int
    coeffs: List[List[float]]


@contextmanager
def atomic_writer(path: PathLike) -> Iterator[IO[str]]:
    """Write to a temporary file next to ``path`` and rename it into place"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            yield handle
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path: PathLike, text: str) -> None:
    with atomic_writer(path) as handle:
        handle.write(text)


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """Columns t, x1..xn"""
    frame = pd.DataFrame(
        traj.states, columns=[f"x{i + 1}" for i in range(traj.states.shape[1])]
    )
    frame.insert(0, "t", traj.times)
    return frame


def trajectory_csv(traj: Trajectory) -> str:
    return trajectory_frame(traj).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_trajectory_csv(traj: Trajectory, path: PathLike) -> None:
    atomic_write_text(path, trajectory_csv(traj))


def series_bundle_json(s: SeriesBundle) -> str:
    doc = SeriesBundleFile(t0=s.t0, order=s.order, coeffs=s.coeffs.tolist())
    return doc.model_dump_json(indent=2) + "\n"


def write_frame_csv(frame: pd.DataFrame, handle: IO[str], header: bool) -> None:
    frame.to_csv(handle, index=False, header=header, float_format=FLOAT_FORMAT, lineterminator="\n")
