"""Shared fixtures and the acceptance-criteria summary hook."""

import pytest

from mortfpca.synthetic import synthetic_bundle

#: filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_truth():
    """Noise-free coherent two-population bundle, 18 years x ages 0..24."""
    _, truth = synthetic_bundle(seed=7, n_years=18, max_age=24, return_truth=True)
    return truth


@pytest.fixture(scope="session")
def small_observed():
    """The noisy counterpart of ``small_truth``."""
    return synthetic_bundle(seed=7, n_years=18, max_age=24)
