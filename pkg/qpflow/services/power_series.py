"""
Truncated power-series arithmetic on coefficient rows

A row ``a`` holds a(0), a(1), ..., a(K): the coefficients of (t - t0)^k.
Every operation truncates its result at the requested order K.
"""

from typing import Optional

import numpy as np

from qpflow.errors import NonzeroConstantTerm


def _row(a, K: int) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = np.zeros(K + 1)
    m = min(K + 1, a.shape[0])
    out[:m] = a[:m]
    return out


def series_product(a, b, K: Optional[int] = None) -> np.ndarray:
    """Truncated Cauchy product: c(k) = sum_{m<=k} a(m) b(k-m)"""
    if K is None:
        K = min(len(a), len(b)) - 1
    return np.convolve(_row(a, K), _row(b, K))[: K + 1]


def series_exp(a, K: Optional[int] = None) -> np.ndarray:
    """
    exp of a series with zero constant term.

    Uses k e(k) = sum_{m=1}^{k} m a(m) e(k-m), e(0) = 1, which follows from
    e' = a' e.
    """
    if K is None:
        K = len(a) - 1
    a = _row(a, K)
    if a[0] != 0.0:
        raise NonzeroConstantTerm(f"series_exp needs a(0) = 0, got {a[0]!r}")

    weighted = np.arange(K + 1) * a
    e = np.zeros(K + 1)
    e[0] = 1.0
    for k in range(1, K + 1):
        e[k] = np.dot(weighted[1 : k + 1], e[k - 1 :: -1]) / k
    return e


def series_antiderivative(a, K: Optional[int] = None) -> np.ndarray:
    """(int a)(k) = a(k-1) / k, zero constant term"""
    if K is None:
        K = len(a)
    a = _row(a, K)
    out = np.zeros(K + 1)
    out[1:] = a[:K] / np.arange(1, K + 1)
    return out


def series_derivative(a) -> np.ndarray:
    """Formal derivative; one order shorter than its input"""
    a = np.asarray(a, dtype=float)
    return a[1:] * np.arange(1, a.shape[0])
