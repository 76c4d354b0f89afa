"""
Quasi-polynomial and Lotka-Volterra systems

A QP system is  x_i' = x_i * sum_j A_ij * prod_k x_k^B_jk  on the positive
cone. Quasi-monomial transformations x_i = prod_k xt_k^C_ik map QP systems
to QP systems (A -> C^-1 A, B -> B C) and leave the N x N matrix B A
unchanged; that matrix is the Lotka-Volterra matrix of the canonical form.
"""

import json
import logging
from typing import Annotated, Any, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    model_validator,
)

from qpflow.config import settings
from qpflow.core.linalg import factorize, solve
from qpflow.errors import (
    DimensionMismatch,
    MalformedInput,
    NonFiniteEntry,
    NonPositiveInitialCondition,
    NonPositiveState,
    NotSquare,
    SingularB,
    SingularTransform,
    UnknownKey,
)

logger = logging.getLogger(__name__)


def _frozen_array(value: Any, ndim: int, what: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"{what} is not a rectangular numeric array: {exc}") from exc
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{what} must have {ndim} dimension(s), got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


Matrix = Annotated[
    np.ndarray,
    BeforeValidator(lambda v: _frozen_array(v, 2, "matrix")),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
Vector = Annotated[
    np.ndarray,
    BeforeValidator(lambda v: _frozen_array(v, 1, "vector")),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name} contains non-finite entries")


def _check_positive_initial(name: str, arr: np.ndarray) -> None:
    bad = np.flatnonzero(arr <= 0.0)
    if bad.size:
        raise NonPositiveInitialCondition(
            f"{name}[{bad[0]}] = {arr[bad[0]]!r} is not strictly positive"
        )


# ==================== Domain types ====================

class QpSystem(BaseModel):
    """The (A, B, x0) triple of a quasi-polynomial system"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    A: Matrix
    B: Matrix
    x0: Vector
    names: Optional[Tuple[str, ...]] = None

    @model_validator(mode="after")
    def _validate(self) -> "QpSystem":
        n, N = self.A.shape
        if n == 0 or N == 0:
            raise DimensionMismatch(f"A must be non-empty, got shape {self.A.shape}")
        if self.B.shape != (N, n):
            raise DimensionMismatch(f"A is {n}x{N} so B must be {N}x{n}, got {self.B.shape}")
        if self.x0.shape != (n,):
            raise DimensionMismatch(f"x0 must have length {n}, got {self.x0.shape[0]}")
        if self.names is not None and len(self.names) != n:
            raise DimensionMismatch(f"expected {n} variable names, got {len(self.names)}")
        _check_finite("A", self.A)
        _check_finite("B", self.B)
        _check_finite("x0", self.x0)
        _check_positive_initial("x0", self.x0)
        return self

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return self.A.shape[1]

    @property
    def is_square(self) -> bool:
        return self.n == self.N

    def variable_names(self) -> Tuple[str, ...]:
        return self.names or tuple(f"x{i + 1}" for i in range(self.n))

    def with_initial(self, x: np.ndarray) -> "QpSystem":
        """Same vector field, new initial condition"""
        return QpSystem(A=self.A, B=self.B, x0=x, names=self.names)


class LvSystem(BaseModel):
    """Lotka-Volterra system u_i' = u_i * sum_j M_ij u_j"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    M: Matrix
    u0: Vector

    @model_validator(mode="after")
    def _validate(self) -> "LvSystem":
        N = self.u0.shape[0]
        if N == 0 or self.M.shape != (N, N):
            raise DimensionMismatch(f"M must be {N}x{N}, got {self.M.shape}")
        _check_finite("M", self.M)
        _check_finite("u0", self.u0)
        _check_positive_initial("u0", self.u0)
        return self

    @property
    def N(self) -> int:
        return self.M.shape[0]

    def with_initial(self, u: np.ndarray) -> "LvSystem":
        return LvSystem(M=self.M, u0=u)


class QmTransform(BaseModel):
    """Quasi-monomial transformation x_i = prod_k xt_k^C_ik"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    C: Matrix

    @model_validator(mode="after")
    def _validate(self) -> "QmTransform":
        if self.C.shape[0] != self.C.shape[1] or self.C.shape[0] == 0:
            raise DimensionMismatch(f"C must be square, got {self.C.shape}")
        _check_finite("C", self.C)
        return self

    @property
    def rcond(self) -> float:
        """Reciprocal 1-norm condition estimate of C"""
        return factorize(self.C).rcond


class LvEmbedding(BaseModel):
    """
    A QP system together with its Lotka-Volterra canonical form.

    The map between them is u_j = prod_k x_k^B_jk.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: QpSystem
    lv: LvSystem


# ==================== Operations ====================

def new_qp_system(A: Any, B: Any, x0: Any, names: Optional[Tuple[str, ...]] = None) -> QpSystem:
    """Build a validated QpSystem; n and N are inferred from A"""
    return QpSystem(A=A, B=B, x0=x0, names=names)


def _check_state(sys: QpSystem, x: Any) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise DimensionMismatch(f"state must have length {sys.n}, got shape {x.shape}")
    if not np.all(x > 0.0):
        raise NonPositiveState(f"state {x.tolist()} leaves the positive cone")
    return x


def evaluate_monomials(sys: QpSystem, x: Any) -> np.ndarray:
    """u_j = prod_k x_k^B_jk"""
    x = _check_state(sys, x)
    return np.prod(np.power(x[np.newaxis, :], sys.B), axis=1)


def rhs(sys: QpSystem, x: Any) -> np.ndarray:
    """x_i' = x_i * sum_j A_ij u_j"""
    x = _check_state(sys, x)
    return x * (sys.A @ evaluate_monomials(sys, x))


def invariant_matrix(sys: QpSystem) -> np.ndarray:
    """The N x N matrix B A, unchanged by quasi-monomial transformations"""
    return sys.B @ sys.A


def _factor_transform(T: QmTransform, n: int):
    if T.C.shape[0] != n:
        raise DimensionMismatch(f"transform is {T.C.shape[0]}x{T.C.shape[0]}, system has n={n}")
    fact = factorize(T.C)
    if fact.rcond < settings.RCOND_MIN:
        raise SingularTransform(
            f"transform matrix is numerically singular (rcond={fact.rcond:.3e} < {settings.RCOND_MIN:.0e})"
        )
    return fact


def quasimonomial_transform(sys: QpSystem, T: QmTransform) -> QpSystem:
    """
    Apply x_i = prod_k xt_k^C_ik.

    Returns the system in the new variables: A -> C^-1 A, B -> B C, and the
    new initial condition from log xt0 = C^-1 log x0.
    """
    if T.C.shape == (sys.n, sys.n) and np.array_equal(T.C, np.eye(sys.n)):
        return sys

    fact = _factor_transform(T, sys.n)
    A_new = solve(fact, sys.A)
    B_new = sys.B @ T.C
    x0_new = np.exp(solve(fact, np.log(sys.x0)))
    logger.debug("quasi-monomial transform applied (rcond=%.3e)", fact.rcond)
    return QpSystem(A=A_new, B=B_new, x0=x0_new)


def transform_state(T: QmTransform, x: Any) -> np.ndarray:
    """Original coordinates -> transformed coordinates"""
    x = np.asarray(x, dtype=float)
    if not np.all(x > 0.0):
        raise NonPositiveState(f"state {x.tolist()} leaves the positive cone")
    fact = _factor_transform(T, x.shape[0])
    return np.exp(solve(fact, np.log(x)))


def inverse_transform_state(T: QmTransform, xt: Any) -> np.ndarray:
    """Transformed coordinates -> original coordinates: x_i = prod_k xt_k^C_ik"""
    xt = np.asarray(xt, dtype=float)
    if not np.all(xt > 0.0):
        raise NonPositiveState(f"state {xt.tolist()} leaves the positive cone")
    return np.prod(np.power(xt[np.newaxis, :], T.C), axis=1)


def to_lotka_volterra(sys: QpSystem) -> LvEmbedding:
    """
    Canonical Lotka-Volterra form through the monomial embedding.

    Works for square, square-singular and non-square systems alike since B is
    never inverted.
    """
    lv = LvSystem(M=invariant_matrix(sys), u0=evaluate_monomials(sys, sys.x0))
    logger.debug("LV embedding: n=%d -> N=%d", sys.n, sys.N)
    return LvEmbedding(source=sys, lv=lv)


def square_canonicalize(sys: QpSystem) -> QpSystem:
    """
    Square systems with invertible B: transform with C = B^-1.

    The result is computed in closed form, B~ = I, A~ = B A and
    log x~0 = B log x0, i.e. x~0 is the vector of quasi-monomials at x0.
    """
    if not sys.is_square:
        raise NotSquare(f"square canonicalization needs n == N, got n={sys.n}, N={sys.N}")

    fact = factorize(sys.B)
    if fact.rcond < settings.RCOND_MIN:
        raise SingularB(f"B is numerically singular (rcond={fact.rcond:.3e})")

    identity = np.eye(sys.n)
    if np.array_equal(sys.B, identity):
        return sys

    return QpSystem(A=sys.B @ sys.A, B=identity, x0=evaluate_monomials(sys, sys.x0))


def lv_system_as_qp(lv: LvSystem) -> QpSystem:
    """An LV system is the QP system with A = M and B = I"""
    return QpSystem(A=lv.M, B=np.eye(lv.N), x0=lv.u0)


# ==================== JSON interchange ====================

class QpSystemFile(BaseModel):
    """On-disk JSON layout of a QP system"""

    model_config = ConfigDict(extra="forbid")

    n: int = Field(..., ge=1)
    N: int = Field(..., ge=1)
    A: list[list[float]]
    B: list[list[float]]
    x0: list[float]


def load_system_json(text: str) -> QpSystem:
    """Parse the JSON interchange format; unknown keys are rejected"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc

    try:
        doc = QpSystemFile.model_validate(raw)
    except ValidationError as exc:
        errors = exc.errors()
        extra = [e for e in errors if e["type"] == "extra_forbidden"]
        if extra:
            keys = ", ".join(str(e["loc"][0]) for e in extra)
            raise UnknownKey(f"unknown key(s) in system file: {keys}") from exc
        first = errors[0]
        where = ".".join(str(part) for part in first["loc"])
        raise MalformedInput(f"{where}: {first['msg']}") from exc

    sys = new_qp_system(doc.A, doc.B, doc.x0)
    if (sys.n, sys.N) != (doc.n, doc.N):
        raise DimensionMismatch(
            f"declared n={doc.n}, N={doc.N} but matrices give n={sys.n}, N={sys.N}"
        )
    return sys


def dump_system_json(sys: QpSystem) -> str:
    doc = QpSystemFile(
        n=sys.n, N=sys.N, A=sys.A.tolist(), B=sys.B.tolist(), x0=sys.x0.tolist()
    )
    return doc.model_dump_json(indent=2) + "\n"
