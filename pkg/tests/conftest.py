from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from interviewkit.dialogue import default_script

settings.register_profile(
    "ci",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def script():
    return default_script()
