"""
System Parser - text format for quasi-polynomial ODE systems

    # logistic growth
    x' = x*(2 - x)
    x(0) = 0.5

Statements are separated by ';' or newlines. Each right-hand side is
expanded into power-product terms c * prod_k x_k^e_k, divided by its own
variable, and the exponent rows of all equations are merged into one shared
B matrix (rows sorted lexicographically). The grammar is in docs/grammar.md.
"""

import io
import keyword
import logging
import re
import tokenize
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)
from sympy.parsing.sympy_parser import TokenError

from qpflow.config import settings
from qpflow.core.systems import QpSystem, load_system_json, new_qp_system
from qpflow.errors import (
    MalformedInput,
    NonPositiveInitial,
    NotQuasiPolynomial,
    SystemSyntaxError,
    UndeclaredVariable,
)

logger = logging.getLogger(__name__)

TRANSFORMATIONS = standard_transformations + (convert_xor,)

# Names the generated code may reference; nothing else is reachable from eval
PARSE_GLOBALS = {
    "__builtins__": {},
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
}

OPERATORS = {"+", "-", "*", "/", "^", "**", "(", ")"}
NUMBER = re.compile(r"(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?")
LAYOUT_TOKENS = {tokenize.NEWLINE, tokenize.NL, tokenize.ENDMARKER, tokenize.INDENT, tokenize.DEDENT}

EQUATION = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*'\s*=(.*)$")
INITIAL = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)\s*\(\s*0\s*\)\s*=(.*)$")

Term = Tuple[int, np.ndarray, float]


class Statement:
    """One ';'- or newline-separated statement with its source position"""

    def __init__(self, text: str, line: int, column: int):
        self.text = text
        self.line = line
        self.column = column

    def error(self, message: str, offset: int = 0) -> SystemSyntaxError:
        return SystemSyntaxError(message, self.line, self.column + offset)


def split_statements(text: str) -> List[Statement]:
    statements = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        start = 0
        for chunk in line.split(";"):
            stripped = chunk.strip()
            if stripped:
                column = start + (len(chunk) - len(chunk.lstrip())) + 1
                statements.append(Statement(stripped, line_no, column))
            start += len(chunk) + 1
    return statements


class SystemParser:
    """Parses the text format into a QpSystem"""

    def __init__(self, dedup_tol: float = None, cancel_tol: float = None):
        self.dedup_tol = settings.DEDUP_TOL if dedup_tol is None else dedup_tol
        self.cancel_tol = settings.CANCEL_TOL if cancel_tol is None else cancel_tol

    def parse(self, text: str) -> QpSystem:
        equations, initial = self._read_statements(split_statements(text))
        if not equations:
            raise MalformedInput("system declares no equations")

        names = [name for name, _, _, _ in equations]
        symbols = {name: sympy.Symbol(name, positive=True) for name in names}

        missing = [name for name in names if name not in initial]
        if missing:
            raise MalformedInput(f"no initial condition for {', '.join(missing)}")

        terms: List[Term] = []
        for i, (name, rhs_text, stmt, rhs_offset) in enumerate(equations):
            expr = self._parse_expression(rhs_text, stmt, rhs_offset, symbols)
            for exponents, coeff in self._power_products(expr, name, names, symbols):
                exponents[i] -= 1.0
                terms.append((i, exponents, coeff))

        A, B = self._assemble(terms, len(names))
        x0 = [initial[name] for name in names]
        logger.info("parsed system: n=%d, N=%d", A.shape[0], A.shape[1])
        return new_qp_system(A, B, x0, names=tuple(names))

    # ---------- statements ----------

    def _read_statements(self, statements: List[Statement]):
        equations: List[Tuple[str, str, Statement, int]] = []
        initial: Dict[str, float] = {}
        pending_initial: List[Tuple[str, float, Statement]] = []

        for stmt in statements:
            eq = EQUATION.match(stmt.text)
            if eq:
                name, rhs_text = eq.group(1), eq.group(2).strip()
                if any(name == seen for seen, _, _, _ in equations):
                    raise stmt.error(f"second equation for '{name}'")
                if not rhs_text:
                    raise stmt.error(f"empty right-hand side for '{name}'", eq.start(2))
                rhs_offset = eq.start(2) + len(eq.group(2)) - len(eq.group(2).lstrip())
                equations.append((name, rhs_text, stmt, rhs_offset))
                continue

            ic = INITIAL.match(stmt.text)
            if ic:
                name, value_text = ic.group(1), ic.group(2).strip()
                try:
                    value = float(value_text)
                except ValueError:
                    raise stmt.error(f"initial value '{value_text}' is not a number", ic.start(2)) from None
                if name in initial or any(name == seen for seen, _, _ in pending_initial):
                    raise stmt.error(f"second initial condition for '{name}'")
                pending_initial.append((name, value, stmt))
                continue

            raise stmt.error(f"expected \"name' = expr\" or \"name(0) = number\", got '{stmt.text}'")

        declared = {name for name, _, _, _ in equations}
        for name, value, stmt in pending_initial:
            if name not in declared:
                raise UndeclaredVariable(
                    f"line {stmt.line}: initial condition for undeclared variable '{name}'"
                )
            if not np.isfinite(value) or value <= 0.0:
                raise NonPositiveInitial(f"line {stmt.line}: {name}(0) = {value!r} is not strictly positive")
            initial[name] = value

        return equations, initial

    # ---------- expressions ----------

    def _screen_tokens(self, rhs_text: str, stmt: Statement, rhs_offset: int, symbols) -> None:
        """Reject anything outside the expression grammar before sympy sees the text"""
        try:
            tokens = [
                tok for tok in tokenize.generate_tokens(io.StringIO(rhs_text).readline)
                if tok.type not in LAYOUT_TOKENS
            ]
        except (tokenize.TokenError, SyntaxError):
            raise stmt.error(f"cannot parse '{rhs_text}'", rhs_offset + _unclosed_paren(rhs_text)) from None

        for tok in tokens:
            if tok.type == tokenize.NUMBER and NUMBER.fullmatch(tok.string):
                continue
            if tok.type == tokenize.OP and tok.string in OPERATORS:
                continue
            if tok.type == tokenize.NAME and not keyword.iskeyword(tok.string):
                continue
            raise stmt.error(f"unexpected '{tok.string}' in '{rhs_text}'", rhs_offset + tok.start[1])

        unknown = []
        for pos, tok in enumerate(tokens):
            if tok.type != tokenize.NAME:
                continue
            called = pos + 1 < len(tokens) and tokens[pos + 1].string == "("
            if tok.string in symbols:
                if called:
                    raise stmt.error(f"'{tok.string}' is a variable, not a function", rhs_offset + tok.start[1])
            elif called:
                raise NotQuasiPolynomial(
                    f"line {stmt.line}: function '{tok.string}' in '{rhs_text}' is not a power product"
                )
            elif tok.string not in unknown:
                unknown.append(tok.string)

        if unknown:
            raise UndeclaredVariable(
                f"line {stmt.line}: undeclared variable(s) {', '.join(sorted(unknown))} in '{rhs_text}'"
            )

    def _parse_expression(self, rhs_text: str, stmt: Statement, rhs_offset: int, symbols) -> sympy.Expr:
        self._screen_tokens(rhs_text, stmt, rhs_offset, symbols)
        try:
            expr = parse_expr(
                rhs_text,
                local_dict=dict(symbols),
                global_dict=dict(PARSE_GLOBALS),
                transformations=TRANSFORMATIONS,
            )
        except (SyntaxError, TokenError) as exc:
            offset = getattr(exc, "offset", None)
            inner = offset - 1 if isinstance(offset, int) and 0 < offset <= len(rhs_text) else 0
            raise stmt.error(f"cannot parse '{rhs_text}'", rhs_offset + inner) from None
        except (TypeError, AttributeError, ValueError, NameError) as exc:
            raise stmt.error(f"cannot parse '{rhs_text}': {exc}", rhs_offset) from None

        if not isinstance(expr, sympy.Expr):
            raise stmt.error(f"'{rhs_text}' is not an arithmetic expression", rhs_offset)
        return expr

    def _power_products(self, expr, name: str, names: List[str], symbols):
        """Yield (exponent row, coefficient) for every term of the expanded expression"""
        index = {symbols[v]: k for k, v in enumerate(names)}
        expanded = sympy.expand(expr, power_base=True, power_exp=True, mul=True, multinomial=True)

        for term in sympy.Add.make_args(expanded):
            if term == 0:
                continue
            coeff, factors = term.as_coeff_mul()
            exponents = np.zeros(len(names))
            for factor in factors:
                if factor.is_number:
                    coeff = coeff * factor
                    continue
                base, exp = factor.as_base_exp()
                if base not in index or not (exp.is_number and exp.is_real):
                    raise NotQuasiPolynomial(
                        f"term '{term}' in the equation for '{name}' is not a power product"
                    )
                exponents[index[base]] += float(exp)

            if not (coeff.is_number and coeff.is_real):
                raise NotQuasiPolynomial(
                    f"term '{term}' in the equation for '{name}' has a non-real coefficient"
                )
            yield exponents, float(coeff)

    # ---------- matrices ----------

    def _assemble(self, terms: List[Term], n: int) -> Tuple[np.ndarray, np.ndarray]:
        rows: List[np.ndarray] = []
        slots = []
        for _, exponents, _ in terms:
            for j, row in enumerate(rows):
                if np.max(np.abs(row - exponents)) <= self.dedup_tol:
                    slots.append(j)
                    break
            else:
                slots.append(len(rows))
                rows.append(exponents)

        A = np.zeros((n, len(rows)))
        for (i, _, coeff), j in zip(terms, slots):
            A[i, j] += coeff
        A[np.abs(A) <= self.cancel_tol] = 0.0

        keep = [j for j in range(len(rows)) if np.any(A[:, j] != 0.0)]
        if not keep:
            return np.zeros((n, 1)), np.zeros((1, n))

        order = sorted(keep, key=lambda j: tuple(rows[j]))
        return A[:, order], np.array([rows[j] for j in order])


def _unclosed_paren(text: str) -> int:
    """Position of the innermost "(" left open, 0 when all are closed"""
    stack = []
    for pos, ch in enumerate(text):
        if ch == "(":
            stack.append(pos)
        elif ch == ")" and stack:
            stack.pop()
    return stack[-1] if stack else 0


def _format_term(coeff: float, exponents: np.ndarray, names: Tuple[str, ...]) -> str:
    parts = [repr(float(coeff))]
    for name, e in zip(names, exponents):
        if e == 0.0:
            continue
        parts.append(name if e == 1.0 else f"{name}^{float(e)!r}")
    return "*".join(parts)


def parse_system(text: str) -> QpSystem:
    return SystemParser().parse(text)


def serialize_system(sys: QpSystem) -> str:
    """Canonical text form; parses back to a system with the same right-hand side"""
    names = sys.variable_names()
    lines = [f"# quasi-polynomial system: n={sys.n}, N={sys.N}"]
    for i, name in enumerate(names):
        terms = []
        for j in range(sys.N):
            if sys.A[i, j] == 0.0:
                continue
            exponents = sys.B[j].copy()
            exponents[i] += 1.0
            terms.append(_format_term(sys.A[i, j], exponents, names))
        lines.append(f"{name}' = {' + '.join(terms) if terms else '0'}")
    for name, value in zip(names, sys.x0):
        lines.append(f"{name}(0) = {float(value)!r}")
    return "\n".join(lines) + "\n"


def load_system(text: str) -> QpSystem:
    """JSON interchange (leading '{') or the text format"""
    if text.lstrip().startswith("{"):
        return load_system_json(text)
    return parse_system(text)


def read_system_file(path) -> QpSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MalformedInput(f"cannot read system file {path}: {exc.strerror}") from exc
    return load_system(text)
