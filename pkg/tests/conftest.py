"""Shared fixtures.

The Monte Carlo batches are session-scoped so that the acceptance module and
the unit tests draw on the same spectra instead of regenerating them.
"""

import pytest

from wignerlab.ensemble import make_symmetric, make_two_point
from wignerlab.mc import simulate_spectra

# master seeds of the shared batches
SEED_500 = 500_2024
SEED_1000 = 1000_2024
SEED_2000 = 2000_2024

TRIALS_500 = 10_000
TRIALS_1000 = 400
TRIALS_2000 = 400

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def two_point():
    return make_two_point(0.8, 0.5)


@pytest.fixture(scope="session")
def symmetric():
    return make_symmetric(0.5)


@pytest.fixture(scope="session")
def batch_500(two_point):
    return simulate_spectra(two_point, 500, TRIALS_500, SEED_500)


@pytest.fixture(scope="session")
def batch_1000(two_point):
    return simulate_spectra(two_point, 1000, TRIALS_1000, SEED_1000)


@pytest.fixture(scope="session")
def batch_2000(two_point):
    return simulate_spectra(two_point, 2000, TRIALS_2000, SEED_2000)


@pytest.fixture(scope="session")
def grid_batches(batch_500, batch_1000, batch_2000):
    return {500: batch_500, 1000: batch_1000, 2000: batch_2000}


@pytest.fixture(scope="session")
def acceptance_report():
    """Callable ``report(number, ok, detail)`` collecting one line per criterion."""

    def report(number: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(_ACCEPTANCE_LINES[-1])

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
