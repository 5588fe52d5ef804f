import numpy as np
import pytest

from edgechaos import sample_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_J():
    return sample_matrix(6, 1.7, seed=2024)
