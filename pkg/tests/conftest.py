import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from modob.exactreal import load_basis

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).resolve().parents[1] / "src" / "modob" / "data"


@pytest.fixture(scope="session")
def sqrt2_basis():
    return load_basis(DATA / "sqrt2.basis")


@pytest.fixture(scope="session")
def golden_basis():
    return load_basis(DATA / "golden.basis")


@pytest.fixture(scope="session")
def lambdaq_basis():
    return load_basis(DATA / "lambdaQ.basis")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
