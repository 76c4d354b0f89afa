"""
Dense linear algebra for small exponent matrices: partial-pivoted LU with a
LAPACK reciprocal condition estimate.
"""

import warnings
from typing import NamedTuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon


class LuFactorization(NamedTuple):
    """LU factors of a square matrix together with its 1-norm rcond estimate"""

    lu: np.ndarray
    piv: np.ndarray
    rcond: float

    @property
    def size(self) -> int:
        return self.lu.shape[0]


def factorize(matrix: np.ndarray) -> LuFactorization:
    """
    Compute the partial-pivoted LU factorization of a square matrix.

    An exactly singular matrix is not an error here; it gets rcond 0 and the
    caller decides what threshold to apply.
    """
    a = np.array(matrix, dtype=float)
    anorm = float(np.linalg.norm(a, 1))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a)

    if anorm == 0.0 or not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
        return LuFactorization(lu, piv, 0.0)

    rcond, _info = dgecon(lu, anorm, norm="1")
    return LuFactorization(lu, piv, float(rcond))


def solve(factorization: LuFactorization, rhs: np.ndarray) -> np.ndarray:
    """Solve C X = rhs given the factorization of C"""
    return lu_solve((factorization.lu, factorization.piv), np.asarray(rhs, dtype=float))


def inverse(factorization: LuFactorization) -> np.ndarray:
    return solve(factorization, np.eye(factorization.size))
