import numpy as np
import pytest

from liouwave import make_torus_grid


@pytest.fixture(scope="session")
def grid32():
    return make_torus_grid(32, 32)


@pytest.fixture(scope="session")
def grid64():
    return make_torus_grid(64, 64)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
