import math

import numpy as np
import pytest

from meanper import Convolver, build_spectrum


@pytest.fixture(scope="session")
def indicator():
    return Convolver.indicator(1.0)


@pytest.fixture(scope="session")
def tent():
    return Convolver.tent(1.0)


@pytest.fixture(scope="session")
def indicator_spectrum(indicator):
    return build_spectrum(indicator, 20)


@pytest.fixture(scope="session")
def tent_spectrum(tent):
    return build_spectrum(tent, 3)


@pytest.fixture(scope="session")
def sinc():
    """Closed form of the indicator transform, 2 sin z / z."""

    def f(z):
        z = np.asarray(z, dtype=complex)
        return np.where(z == 0, 2.0, 2 * np.sin(z) / np.where(z == 0, 1, z))

    return f


def tent_hat(z):
    return 2 * (1 - math.cos(z)) / z**2


ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``acceptance(number, description, passed, detail)``; the line is
    printed immediately and repeated in the terminal summary.
    """

    def record(number: int, description: str, passed: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {description}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.setdefault(number, []).append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        for line in ACCEPTANCE_LINES[number]:
            terminalreporter.write_line(line)
