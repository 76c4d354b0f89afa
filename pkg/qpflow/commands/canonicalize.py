"""
canonicalize - Lotka-Volterra canonical form of a system file
"""

from typing import List, Optional

from pydantic import BaseModel

from qpflow.commands.common import emit, report_stream, require_system
from qpflow.config import RunConfig
from qpflow.core.systems import (
    QmTransform,
    QpSystemFile,
    invariant_matrix,
    square_canonicalize,
    to_lotka_volterra,
)


class CanonicalReport(BaseModel):
    """JSON written by the canonicalize command"""

    M: List[List[float]]
    u0: List[float]
    invariant_BA: List[List[float]]
    square: Optional[QpSystemFile] = None
    square_rcond: Optional[float] = None


def cmd_canonicalize(cfg: RunConfig) -> int:
    system = require_system(cfg)
    embedding = to_lotka_volterra(system)

    square = None
    square_rcond = None
    if cfg.square:
        canonical = square_canonicalize(system)
        # reciprocal 1-norm condition estimate of B, the inverse of the transform used
        square_rcond = QmTransform(C=system.B).rcond
        square = QpSystemFile(
            n=canonical.n,
            N=canonical.N,
            A=canonical.A.tolist(),
            B=canonical.B.tolist(),
            x0=canonical.x0.tolist(),
        )

    report = CanonicalReport(
        M=embedding.lv.M.tolist(),
        u0=embedding.lv.u0.tolist(),
        invariant_BA=invariant_matrix(system).tolist(),
        square=square,
        square_rcond=square_rcond,
    )
    emit(cfg, report.model_dump_json(indent=2, exclude_none=True) + "\n")
    print(f"canonical LV form: n={system.n} -> N={system.N}", file=report_stream(cfg))
    return 0
