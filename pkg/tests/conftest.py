"""Shared fixtures for the qpflow test suite"""

import numpy as np
import pytest

from qpflow.core.systems import new_qp_system
from tests.helpers import SYSTEMS_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def systems_dir():
    return SYSTEMS_DIR


@pytest.fixture
def logistic():
    return new_qp_system([[2.0, -1.0]], [[0.0], [1.0]], [0.5])


@pytest.fixture
def predator_prey():
    """x' = x(1 - y), y' = y(x - 1) with x0 = y0 = 0.5"""
    return new_qp_system(
        [[1.0, -1.0, 0.0], [-1.0, 0.0, 1.0]],
        [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]],
        [0.5, 0.5],
    )
