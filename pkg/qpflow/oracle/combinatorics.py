"""
Combinatorial Oracle - literal Taylor-coefficient formulas and the
generalized factorial tensor

Every function here enumerates index tuples one by one. Nothing is meant to
be fast; the point is to evaluate the closed-form expressions exactly as
written so the series recursion can be checked against them.

Indices are 0-based in this API. The CLI and CSV dumps add 1.

    c_i(k) = u_i sum_{i_1..i_k} M_{i i_1} (M_{i i_2} + M_{i_1 i_2}) ...
             (M_{i i_k} + ... + M_{i_{k-1} i_k}) u_{i_1} ... u_{i_k}

    T(i; i_1..i_k; j_1..j_k) = d(i,j_1) (d(i,j_2) + d(i_1,j_2)) ...
                               (d(i,j_k) + ... + d(i_{k-1},j_k))
"""

import math
from collections import defaultdict
from itertools import product
from typing import Dict, Iterator, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from qpflow.config import settings
from qpflow.errors import BudgetExceeded, DimensionMismatch, InvalidParameter

Polynomial = Dict[Tuple[int, ...], float]


class TensorIndex(BaseModel):
    """Index (i; i_1..i_k; j_1..j_k) of the factorial tensor over N symbols"""

    model_config = ConfigDict(frozen=True)

    N: int
    i: int
    upper: Tuple[int, ...]
    lower: Tuple[int, ...]

    @model_validator(mode="after")
    def _validate(self) -> "TensorIndex":
        if self.N < 1:
            raise InvalidParameter(f"N must be positive, got {self.N}")
        if len(self.upper) != len(self.lower):
            raise InvalidParameter(
                f"upper and lower tuples differ in length: {len(self.upper)} != {len(self.lower)}"
            )
        for idx in (self.i, *self.upper, *self.lower):
            if not 0 <= idx < self.N:
                raise InvalidParameter(f"index {idx} outside 0..{self.N - 1}")
        return self

    @property
    def k(self) -> int:
        return len(self.upper)


def _check_budget(terms: int, budget: Optional[int]) -> None:
    limit = settings.BUDGET if budget is None else budget
    if terms > limit:
        raise BudgetExceeded(f"enumeration needs {terms} terms, budget is {limit}")


def _check_index(i: int, N: int) -> None:
    if not 0 <= i < N:
        raise InvalidParameter(f"component index {i} outside 0..{N - 1}")


def _square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"M must be square, got shape {M.shape}")
    return M


# ==================== Taylor coefficients ====================

def direct_lv_coefficient(M, u0, i: int, k: int, budget: Optional[int] = None) -> float:
    """c_i(k) of the Lotka-Volterra series by literal summation (k-th derivative at 0)"""
    M = _square(M)
    u0 = np.asarray(u0, dtype=float)
    N = M.shape[0]
    _check_index(i, N)
    _check_budget(N**k, budget)

    total = 0.0
    for upper in product(range(N), repeat=k):
        term = 1.0
        for m, i_m in enumerate(upper):
            factor = M[i, i_m] + sum(M[upper[l], i_m] for l in range(m))
            term *= factor * u0[i_m]
        total += term
    return float(u0[i] * total)


def direct_qp_coefficient(A, B, x0, i: int, k: int, budget: Optional[int] = None) -> float:
    """
    C_i(k) of the original QP variables by literal summation.

    Leading factor A_{i i_m}, trailing sums over M = B A, quasi-monomial
    weights prod_j x0_j^B_{i_m j}.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    n, N = A.shape
    if B.shape != (N, n) or x0.shape != (n,):
        raise DimensionMismatch(f"A is {n}x{N}; B must be {N}x{n} and x0 length {n}")
    _check_index(i, n)
    _check_budget(N**k, budget)

    M = B @ A
    weights = np.prod(np.power(x0[np.newaxis, :], B), axis=1)

    total = 0.0
    for upper in product(range(N), repeat=k):
        term = 1.0
        for m, i_m in enumerate(upper):
            factor = A[i, i_m] + sum(M[upper[l], i_m] for l in range(m))
            term *= factor * weights[i_m]
        total += term
    return float(x0[i] * total)


# ==================== Factorial tensor ====================

def _tensor_value(i: int, upper: Sequence[int], lower: Sequence[int]) -> int:
    seen = [i]
    value = 1
    for m, j_m in enumerate(lower):
        value *= seen.count(j_m)
        if value == 0:
            return 0
        seen.append(upper[m])
    return value


def factorial_tensor_entry(idx: TensorIndex) -> int:
    """Integer entry of the generalized factorial tensor, in 0..k!"""
    return _tensor_value(idx.i, idx.upper, idx.lower)


def tensor_sum_over_lower(
    i: int, upper: Sequence[int], N: int, k: int, budget: Optional[int] = None
) -> int:
    """Sum of the tensor over all lower tuples; k! for every i and upper"""
    upper = tuple(upper)
    if len(upper) != k:
        raise InvalidParameter(f"upper tuple has length {len(upper)}, expected {k}")
    _check_index(i, N)
    _check_budget(N**k, budget)
    return sum(_tensor_value(i, upper, lower) for lower in product(range(N), repeat=k))


def tensor_nonzero_enumerate(
    N: int, k: int, i: int, budget: Optional[int] = None
) -> Iterator[Tuple[TensorIndex, int]]:
    """
    All nonzero entries for fixed i, in lexicographic (upper, lower) order.

    Only lower tuples with j_m in {i, i_1, .., i_{m-1}} are visited.
    """
    _check_index(i, N)
    _check_budget(N**k * math.factorial(k), budget)

    for upper in product(range(N), repeat=k):
        choices = [sorted(set((i,) + upper[:m])) for m in range(k)]
        for lower in product(*choices):
            value = _tensor_value(i, upper, lower)
            yield TensorIndex(N=N, i=i, upper=upper, lower=lower), value


def tensor_dense_enumerate(
    N: int, k: int, i: int, budget: Optional[int] = None
) -> Iterator[Tuple[TensorIndex, int]]:
    """Every (upper, lower) pair for fixed i, zeros included"""
    _check_index(i, N)
    _check_budget(N ** (2 * k), budget)
    for upper in product(range(N), repeat=k):
        for lower in product(range(N), repeat=k):
            yield TensorIndex(N=N, i=i, upper=upper, lower=lower), _tensor_value(i, upper, lower)


def contracted_product_check(
    M, u0, i: int, k: int, budget: Optional[int] = None
) -> Tuple[float, float]:
    """
    The weighted product sum written two ways.

    lhs: nested partial sums of M, as in the coefficient formula.
    rhs: doubled sums over lower indices, each term the tensor entry times
    M_{j_1 i_1} ... M_{j_k i_k}.
    """
    M = _square(M)
    u0 = np.asarray(u0, dtype=float)
    N = M.shape[0]
    _check_index(i, N)
    _check_budget(N ** (2 * k), budget)

    lhs = 0.0
    rhs = 0.0
    for upper in product(range(N), repeat=k):
        weight = float(np.prod(u0[list(upper)])) if k else 1.0

        nested = 1.0
        for m, i_m in enumerate(upper):
            nested *= M[i, i_m] + sum(M[upper[l], i_m] for l in range(m))
        lhs += nested * weight

        doubled = 0.0
        for lower in product(range(N), repeat=k):
            entry = _tensor_value(i, upper, lower)
            if entry:
                doubled += entry * math.prod(M[j, i_m] for j, i_m in zip(lower, upper))
        rhs += doubled * weight

    return float(u0[i] * lhs), float(u0[i] * rhs)


# ==================== Lie-derivative bootstrap ====================

def _lie_derivative(p: Polynomial, M: np.ndarray) -> Polynomial:
    """D p = sum_l (dp/du_l) u_l sum_j M_lj u_j on exponent-tuple polynomials"""
    N = M.shape[0]
    out: Polynomial = defaultdict(float)
    for exps, coeff in p.items():
        for l, e_l in enumerate(exps):
            if e_l == 0:
                continue
            for j in range(N):
                if M[l, j] == 0.0:
                    continue
                shifted = list(exps)
                shifted[j] += 1
                out[tuple(shifted)] += coeff * e_l * M[l, j]
    return dict(out)


def _evaluate_polynomial(p: Polynomial, u0: np.ndarray) -> float:
    return float(sum(coeff * np.prod(u0 ** np.array(exps)) for exps, coeff in p.items()))


def lie_derivative_coefficient(M, u0, i: int, k: int) -> float:
    """c_i(k) as the k-fold Lie derivative of u_i along the LV field, at u0"""
    M = _square(M)
    u0 = np.asarray(u0, dtype=float)
    N = M.shape[0]
    _check_index(i, N)

    unit = [0] * N
    unit[i] = 1
    p: Polynomial = {tuple(unit): 1.0}
    for _ in range(k):
        p = _lie_derivative(p, M)
    return _evaluate_polynomial(p, u0)


def bootstrap_lv_coefficient(M, u0, i: int, k: int, budget: Optional[int] = None) -> float:
    """
    c_i(k+1) from one product-rule differentiation of the order-k sum.

    The order-k formula is expanded into monomials u_i u_{i_1} .. u_{i_k},
    differentiated once along the LV field and evaluated at u0.
    """
    M = _square(M)
    u0 = np.asarray(u0, dtype=float)
    N = M.shape[0]
    _check_index(i, N)
    _check_budget(N**k, budget)

    p: Polynomial = defaultdict(float)
    for upper in product(range(N), repeat=k):
        coeff = 1.0
        for m, i_m in enumerate(upper):
            coeff *= M[i, i_m] + sum(M[upper[l], i_m] for l in range(m))
        exps = [0] * N
        exps[i] += 1
        for i_m in upper:
            exps[i_m] += 1
        p[tuple(exps)] += coeff
    return _evaluate_polynomial(_lie_derivative(dict(p), M), u0)
