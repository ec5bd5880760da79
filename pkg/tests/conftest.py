import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from roughcat.metric_core import validate_metric

settings.register_profile("roughcat", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("roughcat")


def planar_metric(P):
    P = np.asarray(P, float)
    return validate_metric(np.hypot(*(P[:, None] - P[None]).transpose(2, 0, 1)), tol=1e-9)


@pytest.fixture
def c4():
    D = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    return validate_metric(D, labels="abcd")


@pytest.fixture
def star_tuple():
    # (center, a, b, c) of a unit star
    return np.array([[0, 1, 1, 1], [1, 0, 2, 2], [1, 2, 0, 2], [1, 2, 2, 0]], float)
