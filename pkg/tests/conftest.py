import numpy as np
import pytest

from coxfock.scenario import random_hermitian


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def rand_q(seed, d, bound, symmetric=False):
    rng = np.random.default_rng(seed)
    if symmetric:
        a = rng.standard_normal((d, d))
        a = a + a.T
        return a * (bound / np.abs(a).max())
    return random_hermitian(rng, d, bound)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
