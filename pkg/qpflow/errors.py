"""
Error hierarchy shared by every qpflow module.

Each error carries a machine-readable ``code`` and the process ``exit_code``
the CLI returns for it. None of them derive from ValueError, so raising one
inside a pydantic validator propagates it unchanged.
"""

INPUT_ERROR = 2
NUMERICAL_FAILURE = 3
VERIFICATION_FAILURE = 1


class QpflowError(Exception):
    """Base class for all qpflow errors"""

    code = "QPFLOW_ERROR"
    exit_code = INPUT_ERROR

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code

    def one_line(self) -> str:
        """Single-line report, prefixed with the error code"""
        text = " ".join(self.message.split())
        return f"error[{self.code}]: {text}"


# ---- input errors ----

class DimensionMismatch(QpflowError):
    code = "DIMENSION_MISMATCH"


class NonPositiveInitialCondition(QpflowError):
    code = "NON_POSITIVE_INITIAL"


NonPositiveInitial = NonPositiveInitialCondition


class NonFiniteEntry(QpflowError):
    code = "NON_FINITE_ENTRY"


class NonPositiveState(QpflowError):
    code = "NON_POSITIVE_STATE"


class NotSquare(QpflowError):
    code = "NOT_SQUARE"


class UnknownKey(QpflowError):
    code = "UNKNOWN_KEY"


class MalformedInput(QpflowError):
    code = "MALFORMED_INPUT"


class InvalidParameter(QpflowError):
    code = "INVALID_PARAMETER"


class SystemSyntaxError(QpflowError):
    code = "SYNTAX_ERROR"

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UndeclaredVariable(QpflowError):
    code = "UNDECLARED_VARIABLE"


class NotQuasiPolynomial(QpflowError):
    code = "NOT_QUASI_POLYNOMIAL"


class NonzeroConstantTerm(QpflowError):
    code = "NONZERO_CONSTANT_TERM"


class InsufficientOrder(QpflowError):
    code = "INSUFFICIENT_ORDER"


class BudgetExceeded(QpflowError):
    code = "BUDGET_EXCEEDED"


# ---- numerical failures ----

class SingularTransform(QpflowError):
    code = "SINGULAR_TRANSFORM"
    exit_code = NUMERICAL_FAILURE


class SingularB(QpflowError):
    code = "SINGULAR_B"
    exit_code = NUMERICAL_FAILURE


class Overflow(QpflowError):
    code = "OVERFLOW"
    exit_code = NUMERICAL_FAILURE

    def __init__(self, message: str, order: int):
        super().__init__(message)
        self.order = order


class StepUnderflow(QpflowError):
    code = "STEP_UNDERFLOW"
    exit_code = NUMERICAL_FAILURE

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class StepLimitExceeded(QpflowError):
    code = "STEP_LIMIT_EXCEEDED"
    exit_code = NUMERICAL_FAILURE


class PositivityLoss(QpflowError):
    code = "POSITIVITY_LOSS"
    exit_code = NUMERICAL_FAILURE


# ---- verification ----

class VerificationFailed(QpflowError):
    code = "VERIFICATION_FAILED"
    exit_code = VERIFICATION_FAILURE
