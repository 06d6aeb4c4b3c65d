import numpy as np
import pytest

from asymcharge.quadrature import build_sphere_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def grid24():
    return build_sphere_grid(24)


@pytest.fixture(scope="session")
def grid48():
    return build_sphere_grid(48)
