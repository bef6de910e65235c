import numpy as np
import pytest

from dmnls.spectral import make_field, make_grid


@pytest.fixture
def grid_1d():
    return make_grid(1, 256, 32.0)


@pytest.fixture
def gaussian_1d(grid_1d):
    x = grid_1d.x[0]
    return make_field(grid_1d, np.exp(-x ** 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
