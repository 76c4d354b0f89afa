"""
tensor - explorer for the generalized factorial tensor
"""

import math
import sys
from contextlib import nullcontext
from itertools import islice

import pandas as pd

from qpflow.commands.common import report_stream
from qpflow.config import RunConfig
from qpflow.errors import InvalidParameter, VerificationFailed
from qpflow.oracle.combinatorics import tensor_nonzero_enumerate
from qpflow.services.io import atomic_writer, write_frame_csv

CHUNK_ROWS = 10_000


def tensor_columns(k: int):
    return ["i", *(f"i_{m}" for m in range(1, k + 1)), *(f"j_{m}" for m in range(1, k + 1)), "value"]


class RowSums:
    """
    Sums over lower tuples, accumulated from the streamed nonzero entries.

    The enumeration yields every upper tuple as one consecutive run, and zero
    entries add nothing, so one running total per run is enough.
    """

    def __init__(self, expected: int):
        self.expected = expected
        self.uppers = 0
        self.mismatched = []
        self._upper = None
        self._total = 0

    def add(self, upper, value: int) -> None:
        if upper != self._upper:
            self.close()
            self._upper = upper
        self._total += value

    def close(self) -> None:
        if self._upper is None:
            return
        self.uppers += 1
        if self._total != self.expected:
            self.mismatched.append(self._upper)
        self._upper = None
        self._total = 0


def _tensor_rows(N: int, k: int, i: int, budget: int, sums: RowSums):
    """1-based CSV rows of the nonzero entries"""
    for idx, value in tensor_nonzero_enumerate(N, k, i - 1, budget=budget):
        sums.add(idx.upper, value)
        yield (idx.i + 1, *(u + 1 for u in idx.upper), *(j + 1 for j in idx.lower), value)
    sums.close()


def cmd_tensor(cfg: RunConfig) -> int:
    if cfg.N is None or cfg.k is None or cfg.i is None:
        raise InvalidParameter("'tensor' needs --N, --k and --i")
    N, k, i = cfg.N, cfg.k, cfg.i
    if i > N:
        raise InvalidParameter(f"--i must be in 1..{N}, got {i}")

    sums = RowSums(math.factorial(k))
    rows = _tensor_rows(N, k, i, cfg.budget, sums)
    columns = tensor_columns(k)
    target = atomic_writer(cfg.output_path) if cfg.output_path else nullcontext(sys.stdout)
    written = 0
    with target as handle:
        while True:
            chunk = list(islice(rows, CHUNK_ROWS))
            if not chunk:
                break
            write_frame_csv(pd.DataFrame(chunk, columns=columns), handle, header=written == 0)
            written += len(chunk)

    out = report_stream(cfg)
    print(f"nonzero entries: {written}", file=out)
    if sums.mismatched:
        first = tuple(u + 1 for u in sums.mismatched[0])
        raise VerificationFailed(
            f"row sum differs from {k}! for {len(sums.mismatched)} upper tuple(s), first {first}"
        )
    if sums.uppers != N**k:
        raise VerificationFailed(f"row sums cover {sums.uppers} of {N**k} upper tuples")
    print(f"row sums over lower indices: all {sums.uppers} equal {k}! = {sums.expected}", file=out)
    return 0
