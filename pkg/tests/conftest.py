import numpy as np
import pytest


def random_cov(rng, p, n=None):
    """Wishart-type sample covariance with a random scale."""
    n = n or int(rng.integers(2, 3 * p + 2))
    X = rng.standard_normal((n, p)) * rng.uniform(0.5, 2.0)
    return np.cov(X.T, bias=True).reshape(p, p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# criterion number -> one-line verdict, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
