"""
Helpers shared by the CLI commands
"""

import sys
from typing import Optional, TextIO

from qpflow.config import RunConfig
from qpflow.core.systems import QpSystem
from qpflow.errors import InvalidParameter
from qpflow.parsers.system_parser import read_system_file
from qpflow.services.io import atomic_write_text


def require_system(cfg: RunConfig) -> QpSystem:
    if cfg.system_path is None:
        raise InvalidParameter(f"'{cfg.command}' needs --system PATH")
    return read_system_file(cfg.system_path)


def report_stream(cfg: RunConfig) -> TextIO:
    """Reports go to stdout unless the data itself is being written there"""
    return sys.stdout if cfg.output_path is not None else sys.stderr


def emit(cfg: RunConfig, text: str, out: Optional[TextIO] = None) -> None:
    """Write the command's data to --out (atomically) or to stdout"""
    if cfg.output_path is not None:
        atomic_write_text(cfg.output_path, text)
    else:
        (out or sys.stdout).write(text)
