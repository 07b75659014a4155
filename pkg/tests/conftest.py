import numpy as np
import pytest

from cellhom import SolverOptions


@pytest.fixture
def opts():
    return SolverOptions()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
