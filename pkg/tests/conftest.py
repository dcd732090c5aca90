import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import sphalign

settings.register_profile(
    "package",
    deadline=None,
    max_examples=50,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("package")


@pytest.fixture(scope="session", autouse=True)
def warm_backend():
    """Pay compile/cache cost once so timed assertions stay honest."""
    return sphalign.warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
