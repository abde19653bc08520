from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cell_averages(f_antiderivative, edges):
    """Exact cell averages from an antiderivative evaluated at cell edges."""
    F = f_antiderivative(np.asarray(edges, dtype=float))
    return (F[1:] - F[:-1]) / np.diff(edges)
