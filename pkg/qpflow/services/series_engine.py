"""
Series Engine - Taylor-series solutions of LV and QP systems

The Lotka-Volterra series comes from the Cauchy-product recursion
    (k+1) a_i(k+1) = sum_{m=0}^{k} a_i(m) * sum_j M_ij a_j(k-m)
and the series of the original QP variables from
    x_i = x_i(t0) * exp( int sum_j A_ij U_j )
where U is the series of the LV embedding. Coefficients are stored in the
monomial basis a(k) = c(k)/k!.

Long horizons are covered by re-expanding at the end of every step.
"""

import logging
import math
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qpflow.config import settings
from qpflow.core.systems import LvSystem, Matrix, QpSystem, Vector, to_lotka_volterra
from qpflow.errors import (
    InsufficientOrder,
    InvalidParameter,
    Overflow,
    StepLimitExceeded,
    StepUnderflow,
)
from qpflow.services.power_series import (
    series_antiderivative,
    series_derivative,
    series_exp,
    series_product,
)

logger = logging.getLogger(__name__)

System = Union[QpSystem, LvSystem]


# ==================== Domain types ====================

class SeriesBundle(BaseModel):
    """Truncated Taylor coefficients, one row per component"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    t0: float = 0.0
    coeffs: Matrix

    @model_validator(mode="after")
    def _validate(self) -> "SeriesBundle":
        if self.coeffs.shape[0] == 0 or self.coeffs.shape[1] == 0:
            raise InvalidParameter(f"empty coefficient array {self.coeffs.shape}")
        return self

    @property
    def dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def order(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def state(self) -> np.ndarray:
        return self.coeffs[:, 0]


class TrajectoryMeta(BaseModel):
    """How a trajectory was produced"""

    model_config = ConfigDict(frozen=True)

    method: str
    order: Optional[int] = None
    tol: float
    accepted: int = Field(..., ge=0)
    rejected: int = Field(0, ge=0)
    first_radius: Optional[float] = None


class Trajectory(BaseModel):
    """Accepted (t, state) samples; Taylor runs also keep each step's series"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: Vector
    states: Matrix
    meta: TrajectoryMeta
    segments: Tuple[SeriesBundle, ...] = ()

    @model_validator(mode="after")
    def _validate(self) -> "Trajectory":
        if self.states.shape[0] != self.times.shape[0]:
            raise InvalidParameter(
                f"{self.times.shape[0]} times but {self.states.shape[0]} states"
            )
        if np.any(np.diff(self.times) <= 0.0):
            raise InvalidParameter("trajectory times must be strictly increasing")
        if not np.all(self.states > 0.0):
            raise InvalidParameter("trajectory states must stay in the positive cone")
        return self

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


# ==================== Coefficients ====================

def _check_order(K: int, minimum: int = 0) -> None:
    if K < minimum:
        raise InvalidParameter(f"order must be >= {minimum}, got {K}")


def lv_taylor_coefficients(lv: LvSystem, K: int, t0: float = 0.0) -> SeriesBundle:
    """Taylor coefficients of the LV solution through order K, O(N^2 K^2)"""
    _check_order(K)
    N = lv.N
    a = np.zeros((N, K + 1))
    w = np.zeros((N, K + 1))
    a[:, 0] = lv.u0

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(K):
            w[:, k] = lv.M @ a[:, k]
            a[:, k + 1] = np.einsum("im,im->i", a[:, : k + 1], w[:, k::-1]) / (k + 1)
            if not np.all(np.isfinite(a[:, k + 1])):
                raise Overflow(f"LV coefficient of order {k + 1} is not finite", order=k + 1)

    return SeriesBundle(t0=t0, coeffs=a)


def qp_taylor_coefficients(sys: QpSystem, K: int, t0: float = 0.0) -> SeriesBundle:
    """Taylor coefficients of the original QP variables through order K"""
    _check_order(K)
    U = lv_taylor_coefficients(to_lotka_volterra(sys).lv, K, t0=t0)
    log_rate = sys.A @ U.coeffs

    x = np.zeros((sys.n, K + 1))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(sys.n):
            x[i] = sys.x0[i] * series_exp(series_antiderivative(log_rate[i], K), K)
        bad = ~np.all(np.isfinite(x), axis=0)
    if np.any(bad):
        order = int(np.argmax(bad))
        raise Overflow(f"QP coefficient of order {order} is not finite", order=order)

    return SeriesBundle(t0=t0, coeffs=x)


def lv_residual(lv: LvSystem, s: SeriesBundle) -> float:
    """
    Max abs difference between the formal derivative of the series and the
    series of u_i * sum_j M_ij u_j, through order K-1.
    """
    K = s.order
    if K < 1:
        return 0.0
    rates = lv.M @ s.coeffs
    worst = 0.0
    for i in range(s.dim):
        lhs = series_derivative(s.coeffs[i])
        rhs = series_product(s.coeffs[i], rates[i], K - 1)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ==================== Evaluation ====================

def estimate_radius(s: SeriesBundle) -> float:
    """
    Root-test estimate of the convergence radius.

    1 / max |a_i(k)|^(1/k) over the top half of the retained orders and over
    all components; math.inf when that tail vanishes.
    """
    K = s.order
    if K < 2:
        raise InsufficientOrder(f"radius estimate needs order >= 2, got {K}")

    ks = np.arange(max(1, (K + 1) // 2), K + 1)
    with np.errstate(divide="ignore", over="ignore"):
        roots = np.abs(s.coeffs[:, ks]) ** (1.0 / ks)
    peak = float(np.max(roots))
    if peak == 0.0:
        return math.inf
    return 1.0 / peak


def evaluate_series(s: SeriesBundle, t: float) -> np.ndarray:
    """Horner evaluation of sum_k a_i(k) (t - t0)^k"""
    return P.polyval(t - s.t0, s.coeffs.T)


def evaluate_trajectory(traj: Trajectory, times) -> np.ndarray:
    """Dense output of a Taylor-stepped trajectory at arbitrary times"""
    if not traj.segments:
        raise InvalidParameter(f"{traj.meta.method} trajectory carries no dense output")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    t_first, t_last = traj.times[0], traj.times[-1]
    if np.any(times < t_first) or np.any(times > t_last):
        raise InvalidParameter(f"sample times must lie in [{t_first}, {t_last}]")

    starts = np.array([seg.t0 for seg in traj.segments])
    idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(starts) - 1)
    return np.array([evaluate_series(traj.segments[j], t) for j, t in zip(idx, times)])


def lotka_volterra_invariant(x, y, a: float, b: float, c: float, d: float):
    """First integral of x' = x(a - b y), y' = y(-c + d x)"""
    return d * x - c * np.log(x) + b * y - a * np.log(y)


# ==================== Integration ====================

class TaylorIntegrator:
    """Analytic continuation by repeated Taylor expansion"""

    def __init__(
        self,
        system: System,
        order: int,
        tol: float,
        safety: Optional[float] = None,
        max_steps: Optional[int] = None,
    ):
        if order < 4:
            raise InvalidParameter(f"Taylor stepping needs order >= 4, got {order}")
        if not tol > 0.0:
            raise InvalidParameter(f"tolerance must be positive, got {tol}")
        self.system = system
        self.order = order
        self.tol = tol
        self.safety = settings.SAFETY_FACTOR if safety is None else safety
        self.max_steps = settings.MAX_STEPS if max_steps is None else max_steps

    @property
    def initial_state(self) -> np.ndarray:
        if isinstance(self.system, LvSystem):
            return self.system.u0
        return self.system.x0

    def expand(self, x: np.ndarray, t: float) -> SeriesBundle:
        """Series of the solution through the state x at time t"""
        moved = self.system.with_initial(x)
        if isinstance(moved, LvSystem):
            return lv_taylor_coefficients(moved, self.order, t0=t)
        return qp_taylor_coefficients(moved, self.order, t0=t)

    def tolerance_step(self, s: SeriesBundle) -> float:
        """
        Largest h with max_i |a_i(k)| h^k <= tol for the last two orders.

        Two orders guard against a tail coefficient that vanishes by symmetry.
        """
        h = math.inf
        for k in (s.order - 1, s.order):
            peak = float(np.max(np.abs(s.coeffs[:, k])))
            if peak > 0.0:
                h = min(h, (self.tol / peak) ** (1.0 / k))
        return h

    def integrate(self, t_end: float) -> Trajectory:
        if not t_end > 0.0:
            raise InvalidParameter(f"t_end must be positive, got {t_end}")

        min_step = 1e-14 * t_end
        t = 0.0
        x = np.array(self.initial_state, dtype=float)
        times: List[float] = [t]
        states: List[np.ndarray] = [x]
        segments: List[SeriesBundle] = []
        rejected = 0
        first_radius = None

        while t < t_end:
            if len(segments) >= self.max_steps:
                raise StepLimitExceeded(f"more than {self.max_steps} steps before t={t_end}")

            series = self.expand(x, t)
            radius = estimate_radius(series)
            if first_radius is None:
                first_radius = radius

            remaining = t_end - t
            h = min(self.safety * radius, self.tolerance_step(series), remaining)
            while True:
                if h < min_step:
                    raise StepUnderflow(
                        f"step {h:.3e} fell below {min_step:.3e} at t={t!r}; "
                        "likely a movable singularity or loss of positivity",
                        t=t,
                    )
                x_new = evaluate_series(series, t + h)
                if np.all(np.isfinite(x_new)) and np.all(x_new > 0.0):
                    break
                rejected += 1
                h *= 0.5

            t = t_end if h == remaining else t + h
            x = x_new
            times.append(t)
            states.append(x)
            segments.append(series)
            logger.debug("taylor step h=%.3e radius=%.3e t=%.6g", h, radius, t)

        logger.info("taylor integration: %d steps, %d rejected", len(segments), rejected)
        return Trajectory(
            times=times,
            states=states,
            meta=TrajectoryMeta(
                method="taylor",
                order=self.order,
                tol=self.tol,
                accepted=len(segments),
                rejected=rejected,
                first_radius=None if math.isinf(first_radius) else first_radius,
            ),
            segments=tuple(segments),
        )


def taylor_step_integrate(system: System, t_end: float, tol: float, K: int) -> Trajectory:
    return TaylorIntegrator(system, order=K, tol=tol).integrate(t_end)
