import numpy as np
import pytest

from locscape import random_band_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def band300():
    """The 300-site, bandwidth-2 matrix family used for the band experiments."""
    return random_band_matrix(300, 2, 7)
