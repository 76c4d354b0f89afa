"""
qpflow - command-line entry point
Parses arguments into a RunConfig, configures logging and dispatches to the
command modules. Errors are reported as one line on stderr.
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError

from qpflow.commands.canonicalize import cmd_canonicalize
from qpflow.commands.coeffs import cmd_coeffs
from qpflow.commands.solve import cmd_solve
from qpflow.commands.tensor import cmd_tensor
from qpflow.commands.verify import cmd_verify
from qpflow.config import RunConfig, Settings
from qpflow.errors import InvalidParameter, QpflowError

logger = logging.getLogger("qpflow")

COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "solve": cmd_solve,
    "canonicalize": cmd_canonicalize,
    "verify": cmd_verify,
    "tensor": cmd_tensor,
    "coeffs": cmd_coeffs,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so usage errors share the error format"""

    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qpflow",
        description="Power-series solver for quasi-polynomial ODE systems",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--system", dest="system_path", help="system file (text format or JSON)")
    parser.add_argument("--t-end", dest="t_end", type=float)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--order", type=int, help="Taylor order K")
    parser.add_argument("--out", dest="output_path", help="write data here instead of stdout")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--square", action="store_true", help="also emit the square canonical QP form")
    parser.add_argument("--N", dest="N", type=int, help="tensor: number of symbols")
    parser.add_argument("--k", dest="k", type=int, help="tensor: order; coeffs: highest order")
    parser.add_argument("--i", dest="i", type=int, help="tensor: component index, 1-based")
    parser.add_argument("--log-level", dest="log_level")
    return parser


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _run_config(args: argparse.Namespace, env: Settings) -> RunConfig:
    fields = {
        key: value
        for key, value in vars(args).items()
        if key != "log_level" and value is not None
    }
    fields.setdefault("budget", env.BUDGET)
    fields.setdefault("t_end", env.DEFAULT_T_END)
    fields.setdefault("tol", env.DEFAULT_TOL)
    fields.setdefault("order", env.DEFAULT_ORDER)
    try:
        return RunConfig(**fields)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "arguments"
        raise InvalidParameter(f"{where}: {first['msg']}") from None


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error[{InvalidParameter.code}]: {exc}", file=sys.stderr)
        return InvalidParameter.exit_code

    env = Settings()
    _configure_logging(args.log_level or env.LOG_LEVEL)

    try:
        cfg = _run_config(args, env)
        logger.debug("running %s with %s", cfg.command, cfg.model_dump(exclude_none=True))
        return COMMANDS[cfg.command](cfg)
    except QpflowError as exc:
        print(exc.one_line(), file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        logger.debug("unexpected failure", exc_info=True)
        print(f"error[INTERNAL_ERROR]: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
