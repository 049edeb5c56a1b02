"""Shared fixtures: the small named elections used throughout the suite."""

import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from elections import e1, e2, e3, e5, half_support

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=400, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def E1():
    return e1()


@pytest.fixture
def E2():
    return e2()


@pytest.fixture
def E3():
    return e3()


@pytest.fixture
def E5():
    return e5()


@pytest.fixture
def HALF():
    return half_support()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for name, module in list(sys.modules.items()):
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines.update(getattr(module, "RESULTS", {}))
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
