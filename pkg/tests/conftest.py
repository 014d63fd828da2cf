"""Shared test configuration: deterministic RNG fixtures and hypothesis profile."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    """Fresh deterministic generator per test."""
    return np.random.default_rng(12345)


def three_se(values):
    """(mean, 3 * standard error of the mean) for a 1-D sample."""
    arr = np.asarray(values, dtype=float)
    se = arr.std(ddof=1) / np.sqrt(arr.size) if arr.size > 1 else 0.0
    return float(arr.mean()), 3.0 * float(se)
