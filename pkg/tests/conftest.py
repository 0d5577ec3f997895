import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from periodic_homog import Ball, Barrier, DoubleWell, Integrand, PeriodicCoefficient, Quadratic

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture
def laminate_1d():
    """a(x) in {1, 2} on equal halves, quadratic kernel on |xi| <= 1."""
    return Integrand(PeriodicCoefficient.laminate((1.0, 2.0), 1), Quadratic(1.0, Ball(1.0)))


@pytest.fixture
def barrier_1d():
    C = Ball(1.0)
    return Integrand(PeriodicCoefficient.laminate((1.0, 2.0), 1), Barrier(C, Quadratic(1.0, shape=(1, 1)), 1.0, 1.0))


@pytest.fixture
def double_well():
    return DoubleWell()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion and return the flag."""

    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
