"""Random instances and closed forms used across the test modules"""

from pathlib import Path

import numpy as np

from qpflow.core.systems import LvSystem, QpSystem, new_qp_system

SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"


def logistic_closed_form(t):
    return 2.0 / (1.0 + 3.0 * np.exp(-2.0 * np.asarray(t)))


def random_lv(rng: np.random.Generator, N: int) -> LvSystem:
    return LvSystem(M=rng.uniform(-2.0, 2.0, (N, N)), u0=rng.uniform(0.1, 2.0, N))


def random_qp(rng: np.random.Generator, n: int, N: int) -> QpSystem:
    return new_qp_system(
        rng.uniform(-1.0, 1.0, (n, N)),
        rng.uniform(-1.0, 1.0, (N, n)),
        rng.uniform(0.5, 1.5, n),
    )
