import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ncesprit.array_model import SamplingGrid

settings.register_profile("repo", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

FIG3 = SamplingGrid(([0.0, 1.0, 2.0, 4.0, 5.0], [0.0, 1.0, 3.0, 4.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fig3_grid():
    return FIG3
