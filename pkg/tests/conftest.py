import numpy as np
import pytest
from hypothesis import settings

from sl2flow.charts import PhaseState, big_phi
from sl2flow.matrix_core import Mat2

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_state(rng, scale=1.0) -> PhaseState:
    """A point of the tangent bundle built through the chart, so det A = 1 exactly-ish."""
    x = rng.uniform(-scale, scale, 3)
    y = rng.uniform(-scale, scale, 3)
    return big_phi(tuple(x), tuple(y))


def random_sl2(rng, scale=1.0) -> Mat2:
    # independent of the chart: [[a, b], [c, (1 + b c) / a]]
    a = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
    b, c = rng.uniform(-scale, scale, 2)
    return Mat2(a, b, c, (1.0 + b * c) / a)


def as_np(A) -> np.ndarray:
    return np.array([[A[0], A[1]], [A[2], A[3]]], dtype=float)


@pytest.fixture
def rng():
    return np.random.default_rng(20240519)
