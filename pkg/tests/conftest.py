"""Shared test configuration.

Exact-arithmetic cases can be slow per example, so the hypothesis
deadline is lifted; counts stay at the library default.
"""

from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "exact-friendly",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact-friendly")


@pytest.fixture
def rng() -> random.Random:
    """Deterministic stream for tests that sample their own cases."""
    return random.Random(20260825)
