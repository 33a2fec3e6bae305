import numpy as np
import pytest

from spectralcut.curve import period_integral

# the cubic coupling at which the moduli-space branch points sit at S = ±1
W_FIG = 3 / 2 ** (2 / 3)


def assert_periods(curve, rel=1e-6):
    """Every cut period reproduces its S_j to rel * max(|S_j|, 1e-3)."""
    for j, cut in enumerate(curve.cuts):
        err = abs(period_integral(curve, j) - cut.S)
        assert err <= rel * max(abs(cut.S), 1e-3), (j, err, cut.S)


@pytest.fixture
def w_fig():
    return W_FIG


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
