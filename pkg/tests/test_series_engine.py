import math

import numpy as np
import pytest
import sympy
from numpy.testing import assert_allclose, assert_array_equal

from qpflow.core.systems import LvSystem, lv_system_as_qp, new_qp_system, to_lotka_volterra
from qpflow.errors import (
    InsufficientOrder,
    InvalidParameter,
    NonzeroConstantTerm,
    Overflow,
    StepLimitExceeded,
    StepUnderflow,
)
from qpflow.oracle.combinatorics import direct_lv_coefficient
from qpflow.services.power_series import (
    series_antiderivative,
    series_derivative,
    series_exp,
    series_product,
)
from qpflow.services.reference_integrator import rk_reference
from qpflow.services.series_engine import (
    SeriesBundle,
    TaylorIntegrator,
    Trajectory,
    TrajectoryMeta,
    estimate_radius,
    evaluate_series,
    evaluate_trajectory,
    lotka_volterra_invariant,
    lv_residual,
    lv_taylor_coefficients,
    qp_taylor_coefficients,
    taylor_step_integrate,
)
from tests.helpers import logistic_closed_form, random_lv


# ---------- power-series arithmetic ----------

def test_series_product_identity(rng):
    b = rng.normal(size=8)
    one = np.zeros(8)
    one[0] = 1.0
    assert_array_equal(series_product(one, b, 7), b)


def test_series_product_difference_of_squares():
    assert_array_equal(series_product([1.0, 1.0, 0.0], [1.0, -1.0, 0.0], 2), [1.0, 0.0, -1.0])


def test_series_product_matches_convolution_sum(rng):
    a, b = rng.normal(size=10), rng.normal(size=10)
    expected = [sum(a[m] * b[k - m] for m in range(k + 1)) for k in range(10)]
    assert_allclose(series_product(a, b, 9), expected, rtol=1e-14, atol=1e-14)


def test_series_exp_basic_cases():
    assert_array_equal(series_exp(np.zeros(6)), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    K = 12
    t_row = np.zeros(K + 1)
    t_row[1] = 1.0
    expected = [1.0 / math.factorial(k) for k in range(K + 1)]
    assert_allclose(series_exp(t_row, K), expected, rtol=1e-14)


def test_series_exp_matches_pointwise_exponential(rng):
    K = 20
    a = rng.uniform(-1.0, 1.0, K + 1)
    a[0] = 0.0
    e = series_exp(a, K)
    for t in (0.01, 0.03, 0.05):
        direct = math.exp(np.polynomial.polynomial.polyval(t, a))
        assert np.polynomial.polynomial.polyval(t, e) == pytest.approx(direct, rel=1e-8)


def test_series_exp_rejects_constant_term():
    with pytest.raises(NonzeroConstantTerm):
        series_exp([0.5, 1.0, 0.0])


def test_series_antiderivative_examples(rng):
    assert_array_equal(series_antiderivative([1.0, 0.0, 0.0], 2), [0.0, 1.0, 0.0])
    assert_array_equal(series_antiderivative([0.0, 2.0, 0.0], 2), [0.0, 0.0, 1.0])
    a = rng.normal(size=7)
    assert_allclose(series_derivative(series_antiderivative(a, 7)), a, rtol=1e-15)


# ---------- coefficients ----------

def test_lv_coefficients_of_zero_matrix_are_constant():
    s = lv_taylor_coefficients(LvSystem(M=np.zeros((2, 2)), u0=[0.4, 1.7]), 8)
    assert_array_equal(s.coeffs[:, 0], [0.4, 1.7])
    assert_array_equal(s.coeffs[:, 1:], 0.0)


def test_one_dimensional_factorial_collapse(rng):
    for _ in range(20):
        m = rng.uniform(-2.0, 2.0)
        x0 = rng.uniform(0.01, 2.0)
        s = lv_taylor_coefficients(LvSystem(M=[[m]], u0=[x0]), 12)
        for k in range(13):
            expected = m**k * x0 ** (k + 1)
            assert s.coeffs[0, k] == pytest.approx(expected, rel=1e-12)
            assert direct_lv_coefficient([[m]], [x0], 0, k) == pytest.approx(
                math.factorial(k) * expected, rel=1e-12
            )


def test_lv_coefficients_match_literal_formula(rng):
    for _ in range(50):
        N = int(rng.integers(1, 4))
        lv = random_lv(rng, N)
        s = lv_taylor_coefficients(lv, 6)
        for k in range(7):
            for i in range(N):
                oracle = direct_lv_coefficient(lv.M, lv.u0, i, k)
                scale = direct_lv_coefficient(np.abs(lv.M), lv.u0, i, k)
                value = s.coeffs[i, k] * math.factorial(k)
                assert abs(value - oracle) <= 1e-11 * scale


def test_qp_coefficients_of_lv_system_equal_lv_coefficients(rng):
    lv = LvSystem(M=rng.uniform(-1.0, 1.0, (3, 3)), u0=rng.uniform(0.2, 1.0, 3))
    expected = lv_taylor_coefficients(lv, 10).coeffs
    assert_allclose(
        qp_taylor_coefficients(lv_system_as_qp(lv), 10).coeffs,
        expected,
        rtol=1e-10,
        atol=1e-12 * np.max(np.abs(expected)),
    )


def test_qp_coefficients_one_dimensional():
    m, x0 = -0.7, 1.3
    s = qp_taylor_coefficients(new_qp_system([[m]], [[1.0]], [x0]), 10)
    expected = [m**k * x0 ** (k + 1) for k in range(11)]
    assert_allclose(s.coeffs[0], expected, rtol=1e-12)


def test_logistic_coefficients_match_closed_form(logistic):
    t = sympy.Symbol("t")
    closed = sympy.series(2 / (1 + 3 * sympy.exp(-2 * t)), t, 0, 11).removeO()
    expected = [float(closed.coeff(t, k)) for k in range(11)]

    s = qp_taylor_coefficients(logistic, 10)
    assert_allclose(s.coeffs[0], expected, rtol=1e-12, atol=1e-13)


def test_series_residual_vanishes(rng):
    for N in (1, 2, 3):
        lv = LvSystem(M=rng.uniform(-1.0, 1.0, (N, N)), u0=rng.uniform(0.1, 1.0, N))
        s = lv_taylor_coefficients(lv, 12)
        scale = (1.0 + np.max(np.abs(s.coeffs))) ** 2
        assert lv_residual(lv, s) <= 1e-12 * scale


def test_coefficients_overflow_is_reported():
    with pytest.raises(Overflow) as info:
        lv_taylor_coefficients(LvSystem(M=[[1e200]], u0=[1e200]), 5)
    assert info.value.order == 1


def test_series_are_shifted_to_expansion_point(logistic):
    s = qp_taylor_coefficients(logistic, 6, t0=2.5)
    assert s.t0 == 2.5
    assert_array_equal(evaluate_series(s, 2.5), [0.5])


# ---------- radius and evaluation ----------

def test_radius_of_geometric_series():
    r = 0.5
    s = SeriesBundle(coeffs=[[r**-k for k in range(21)]])
    assert estimate_radius(s) == pytest.approx(r, rel=0.05)


def test_radius_of_square_growth_pole():
    s = lv_taylor_coefficients(LvSystem(M=[[1.0]], u0=[1.0]), 20)
    assert estimate_radius(s) == pytest.approx(1.0, rel=0.05)


def test_radius_of_constant_series_is_unbounded():
    s = lv_taylor_coefficients(LvSystem(M=np.zeros((2, 2)), u0=[1.0, 2.0]), 10)
    assert math.isinf(estimate_radius(s))


def test_radius_needs_order_two():
    with pytest.raises(InsufficientOrder):
        estimate_radius(SeriesBundle(coeffs=[[1.0, 1.0]]))


def test_evaluate_series_at_expansion_point(rng):
    lv = random_lv(rng, 3)
    s = lv_taylor_coefficients(lv, 10)
    assert_array_equal(evaluate_series(s, 0.0), lv.u0)


def test_evaluate_geometric_series_inside_disk():
    m, x0 = 1.0, 0.8
    s = lv_taylor_coefficients(LvSystem(M=[[m]], u0=[x0]), 40)
    rho = 1.0 / (m * x0)
    t = rho / 2
    assert evaluate_series(s, t)[0] == pytest.approx(x0 / (1 - m * x0 * t), rel=1e-10)


def test_evaluation_is_linear_in_coefficients(rng):
    a = rng.normal(size=(2, 6))
    b = rng.normal(size=(2, 6))
    t = 0.3
    lhs = evaluate_series(SeriesBundle(coeffs=2.0 * a + b), t)
    rhs = 2.0 * evaluate_series(SeriesBundle(coeffs=a), t) + evaluate_series(SeriesBundle(coeffs=b), t)
    assert_allclose(lhs, rhs, rtol=1e-13)


# ---------- Taylor stepping ----------

def test_zero_field_takes_one_step():
    traj = taylor_step_integrate(LvSystem(M=np.zeros((2, 2)), u0=[1.0, 3.0]), 7.0, 1e-10, 10)
    assert traj.meta.accepted == 1
    assert_array_equal(traj.times, [0.0, 7.0])
    assert_array_equal(traj.states, [[1.0, 3.0], [1.0, 3.0]])
    assert traj.meta.first_radius is None


def test_logistic_agrees_with_closed_form(logistic):
    traj = taylor_step_integrate(logistic, 5.0, 1e-10, 20)
    assert traj.times[-1] == 5.0
    assert abs(traj.final_state[0] - logistic_closed_form(5.0)) < 1e-9

    samples = np.linspace(0.0, 5.0, 50)
    dense = evaluate_trajectory(traj, samples)[:, 0]
    assert np.max(np.abs(dense - logistic_closed_form(samples))) < 1e-9


def test_trajectory_metadata(logistic):
    traj = taylor_step_integrate(logistic, 2.0, 1e-10, 16)
    assert traj.meta.method == "taylor"
    assert traj.meta.order == 16
    assert traj.meta.accepted == len(traj.segments) == len(traj.times) - 1
    assert traj.meta.first_radius == pytest.approx(estimate_radius(traj.segments[0]))
    assert np.all(np.diff(traj.times) > 0.0)


def test_singularity_stops_stepping():
    square_growth = new_qp_system([[1.0]], [[1.0]], [1.0])
    assert estimate_radius(qp_taylor_coefficients(square_growth, 20)) == pytest.approx(1.0, rel=0.05)

    with pytest.raises(StepUnderflow) as info:
        taylor_step_integrate(square_growth, 2.0, 1e-10, 20)
    assert 0.99 < info.value.t < 1.0 + 1e-6


def test_step_limit():
    integrator = TaylorIntegrator(LvSystem(M=[[-1.0]], u0=[1.0]), order=4, tol=1e-12, max_steps=3)
    with pytest.raises(StepLimitExceeded):
        integrator.integrate(10.0)


@pytest.mark.parametrize("order, tol", [(3, 1e-10), (20, 0.0), (20, -1.0)])
def test_integrator_rejects_bad_parameters(order, tol):
    with pytest.raises(InvalidParameter):
        TaylorIntegrator(LvSystem(M=[[1.0]], u0=[1.0]), order=order, tol=tol)


def test_predator_prey_conserves_first_integral(predator_prey):
    tol, t_end = 1e-11, 5.0
    traj = taylor_step_integrate(predator_prey, t_end, tol, 20)
    H = lotka_volterra_invariant(traj.states[:, 0], traj.states[:, 1], 1.0, 1.0, 1.0, 1.0)
    assert np.max(np.abs(H - H[0])) < 10 * tol * t_end


def test_predator_prey_matches_reference_over_long_horizon(predator_prey):
    traj = taylor_step_integrate(predator_prey, 10.0, 1e-10, 20)
    reference = rk_reference(predator_prey, 10.0, 1e-10)
    dense = evaluate_trajectory(traj, reference.times)
    assert np.max(np.abs(dense - reference.states) / reference.states) < 1e-7

    H = lotka_volterra_invariant(traj.states[:, 0], traj.states[:, 1], 1.0, 1.0, 1.0, 1.0)
    assert np.max(np.abs(H - H[0])) < 1e-6


def test_lv_and_qp_forms_give_same_trajectory(logistic):
    lv = to_lotka_volterra(logistic).lv
    qp_traj = taylor_step_integrate(logistic, 1.0, 1e-12, 20)
    lv_traj = taylor_step_integrate(lv, 1.0, 1e-12, 20)
    times = np.linspace(0.0, 1.0, 9)
    x = evaluate_trajectory(qp_traj, times)[:, 0]
    u = evaluate_trajectory(lv_traj, times)[:, 1]
    assert_allclose(x, u, rtol=1e-10)


# ---------- trajectory type ----------

def test_trajectory_validation():
    meta = TrajectoryMeta(method="taylor", tol=1e-10, accepted=1)
    with pytest.raises(InvalidParameter):
        Trajectory(times=[0.0, 0.0], states=[[1.0], [1.0]], meta=meta)
    with pytest.raises(InvalidParameter):
        Trajectory(times=[0.0, 1.0], states=[[1.0], [-1.0]], meta=meta)
    with pytest.raises(InvalidParameter):
        Trajectory(times=[0.0, 1.0], states=[[1.0]], meta=meta)


def test_dense_output_needs_series(logistic):
    reference = rk_reference(logistic, 1.0, 1e-8)
    with pytest.raises(InvalidParameter):
        evaluate_trajectory(reference, [0.5])
