"""
verify - Taylor stepping against the Runge-Kutta reference
"""

import numpy as np

from qpflow.commands.common import require_system
from qpflow.config import RunConfig
from qpflow.errors import VerificationFailed
from qpflow.services.reference_integrator import rk_reference
from qpflow.services.series_engine import evaluate_trajectory, taylor_step_integrate

# scipy rejects rtol below 100 * machine epsilon
RK_TOL_FLOOR = 1e-13


def max_relative_deviation(system, t_end: float, tol: float, order: int) -> float:
    """Largest |x_taylor - x_rk| / |x_rk| over the RK sample times"""
    taylor = taylor_step_integrate(system, t_end, tol, order)
    reference = rk_reference(system, t_end, max(tol * 1e-2, RK_TOL_FLOOR))
    dense = evaluate_trajectory(taylor, reference.times)
    return float(np.max(np.abs(dense - reference.states) / np.abs(reference.states)))


def cmd_verify(cfg: RunConfig) -> int:
    system = require_system(cfg)
    deviation = max_relative_deviation(system, cfg.t_end, cfg.tol, cfg.order)
    threshold = 10.0 * cfg.tol

    print(f"max relative deviation taylor vs rk45: {deviation:.3e} (threshold {threshold:.1e})")
    if not deviation < threshold:
        raise VerificationFailed(f"deviation {deviation:.3e} is not below {threshold:.1e}")
    print("verification passed")
    return 0
