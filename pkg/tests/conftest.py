import warnings

import pytest

from dualdensity import pipeline

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def _examples(pair, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return pipeline.build_examples(*pipeline.pair_densities(pair), **kw)


@pytest.fixture(scope="session")
def gg():
    """gaussian-gaussian at n=7, s=64, X_b=P_b=5."""
    return _examples("gaussian-gaussian")


@pytest.fixture(scope="session")
def figures():
    return {name: _examples(name) for name in pipeline.PAIRS}


@pytest.fixture(scope="session")
def small():
    """A cheap configuration for slow brute-force oracles."""
    return _examples("gaussian-gaussian", n=3, s=4, X_b=4.0, P_b=4.0, epsilon=0.5)
