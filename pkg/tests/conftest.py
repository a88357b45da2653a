import numpy as np
import pytest

from semchan import Distribution, Support


@pytest.fixture
def grid100():
    return Support.integers(1, 100)


@pytest.fixture
def two_points():
    return Support(np.array([0.0, 1.0]))


def random_distribution(rng, support, floor=1e-4):
    """Strictly positive random distribution (keeps logs well-conditioned)."""
    w = rng.random(len(support)) + floor
    return Distribution.from_weights(support, w)
