import pytest
from hypothesis import HealthCheck, settings

from strategies import DATA

# every property suite runs at least 200 generated cases
settings.register_profile(
    "normforge", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("normforge")


@pytest.fixture
def data_text():
    return lambda name: (DATA / name).read_text(encoding="utf-8")
