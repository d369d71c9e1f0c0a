import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cavitychain import ModelParams

settings.register_profile("default", max_examples=60, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("explore", max_examples=300, deadline=None, derandomize=False,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def golden_params():
    return ModelParams(1.0, 1.0, 0.5, 1.0, 0.2, 0.0)


@pytest.fixture
def warm_params():
    return ModelParams(1.0, 1.0, 0.5, 1.0, 0.2, 0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
