"""
Runge-Kutta reference integrator

An adaptive embedded 5(4) Dormand-Prince pair (scipy's RK45) on the QP
right-hand side. It shares nothing with the series machinery, so the two
solvers check each other.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from qpflow.core.systems import LvSystem, QpSystem, lv_system_as_qp, rhs
from qpflow.errors import InvalidParameter, NonPositiveState, PositivityLoss, StepUnderflow
from qpflow.services.series_engine import Trajectory, TrajectoryMeta

logger = logging.getLogger(__name__)


class _LeftPositiveCone(Exception):
    def __init__(self, t: float, x: np.ndarray):
        super().__init__(t, x)
        self.t = t
        self.x = x


def rk_reference(
    sys: Union[QpSystem, LvSystem],
    t_end: float,
    tol: float,
    t_eval: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    Integrate with absolute and relative tolerance ``tol``.

    Without ``t_eval`` every accepted step is returned; with it, the dense
    output of the pair at those times.
    """
    if isinstance(sys, LvSystem):
        sys = lv_system_as_qp(sys)
    if not t_end > 0.0:
        raise InvalidParameter(f"t_end must be positive, got {t_end}")
    if not tol > 0.0:
        raise InvalidParameter(f"tolerance must be positive, got {tol}")

    def vector_field(t, x):
        try:
            return rhs(sys, x)
        except NonPositiveState:
            raise _LeftPositiveCone(t, np.array(x)) from None

    try:
        sol = solve_ivp(
            vector_field,
            (0.0, t_end),
            np.array(sys.x0),
            method="RK45",
            rtol=tol,
            atol=tol,
            t_eval=t_eval,
        )
    except _LeftPositiveCone as exc:
        raise PositivityLoss(
            f"state {exc.x.tolist()} left the positive cone near t={exc.t!r}"
        ) from None

    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise StepUnderflow(f"RK45 stopped at t={t_fail!r}: {sol.message}", t=t_fail)

    states = sol.y.T
    if not np.all(states > 0.0):
        raise PositivityLoss("RK45 trajectory left the positive cone")

    logger.info("rk45: %d rhs evaluations, %d samples", sol.nfev, sol.t.size)
    return Trajectory(
        times=sol.t,
        states=states,
        meta=TrajectoryMeta(method="rk45", tol=tol, accepted=max(sol.t.size - 1, 0)),
    )
