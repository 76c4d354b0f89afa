"""
coeffs - series coefficients next to the literal combinatorial formulas
"""

import math

import numpy as np
import pandas as pd

from qpflow.commands.common import emit, require_system
from qpflow.config import RunConfig
from qpflow.core.systems import to_lotka_volterra
from qpflow.errors import BudgetExceeded, Overflow
from qpflow.oracle.combinatorics import direct_lv_coefficient, direct_qp_coefficient
from qpflow.services.io import FLOAT_FORMAT
from qpflow.services.series_engine import lv_taylor_coefficients, qp_taylor_coefficients


def _deviation(value: float, oracle: float) -> float:
    if np.isnan(oracle):
        return float("nan")
    scale = abs(oracle) if oracle != 0.0 else 1.0
    return abs(value - oracle) / scale


def _times_factorial(coeff: float, order: int) -> float:
    """coeff * order!, raising Overflow when the product is not a finite float"""
    try:
        value = coeff * math.factorial(order)
    except OverflowError:
        # order! alone exceeds the float range; the product may not
        value = coeff
        for m in range(2, order + 1):
            value *= m
    if not math.isfinite(value):
        raise Overflow(f"order {order} coefficient times {order}! is not a finite float", order=order)
    return value


def coefficient_table(system, k: int, budget: int) -> pd.DataFrame:
    """
    One row per (kind, component, order): recursion value times order!, the
    oracle value (NaN when beyond budget) and their relative deviation.
    """
    lv = to_lotka_volterra(system).lv
    qp_series = qp_taylor_coefficients(system, k)
    lv_series = lv_taylor_coefficients(lv, k)

    rows = []
    for order in range(k + 1):
        for comp in range(system.n):
            value = _times_factorial(float(qp_series.coeffs[comp, order]), order)
            try:
                oracle = direct_qp_coefficient(system.A, system.B, system.x0, comp, order, budget=budget)
            except BudgetExceeded:
                oracle = float("nan")
            rows.append(("qp", comp + 1, order, value, oracle, _deviation(value, oracle)))
        for comp in range(lv.N):
            value = _times_factorial(float(lv_series.coeffs[comp, order]), order)
            try:
                oracle = direct_lv_coefficient(lv.M, lv.u0, comp, order, budget=budget)
            except BudgetExceeded:
                oracle = float("nan")
            rows.append(("lv", comp + 1, order, value, oracle, _deviation(value, oracle)))

    frame = pd.DataFrame(
        rows, columns=["kind", "component", "order", "recursion", "oracle", "rel_deviation"]
    )
    return frame.sort_values(["kind", "component", "order"], kind="stable", ignore_index=True)


def cmd_coeffs(cfg: RunConfig) -> int:
    system = require_system(cfg)
    k = cfg.k if cfg.k is not None else 6
    frame = coefficient_table(system, k, cfg.budget)

    if cfg.output_path is not None:
        emit(cfg, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    else:
        emit(cfg, frame.to_string(index=False) + "\n")
    return 0
