"""
solve - Taylor-step integration of a system file
"""

import logging

from qpflow.commands.common import emit, report_stream, require_system
from qpflow.config import RunConfig
from qpflow.services.io import series_bundle_json, trajectory_csv
from qpflow.services.series_engine import taylor_step_integrate

logger = logging.getLogger(__name__)


def cmd_solve(cfg: RunConfig) -> int:
    """
    Integrate to t_end and write the trajectory (csv) or the first
    expansion's coefficients (json).
    """
    system = require_system(cfg)
    traj = taylor_step_integrate(system, cfg.t_end, cfg.tol, cfg.order)

    if cfg.format == "json":
        emit(cfg, series_bundle_json(traj.segments[0]))
    else:
        emit(cfg, trajectory_csv(traj))

    meta = traj.meta
    radius = "unbounded" if meta.first_radius is None else f"{meta.first_radius:.6g}"
    out = report_stream(cfg)
    print(f"radius estimate at t=0: {radius}", file=out)
    print(f"steps: accepted={meta.accepted} rejected={meta.rejected} order={meta.order} tol={meta.tol:g}", file=out)
    print(f"final: t={traj.times[-1]:.17g} x={[float(v) for v in traj.final_state]}", file=out)
    return 0
