import numpy as np
import pytest

from blockade_ladder.ladder import FlippingModel, LadderParams
from blockade_ladder.single_atom import RateParams


@pytest.fixture
def fig3_params():
    """N=3, Omega=30, gamma=gamma_rg=gamma_rd=1, D^j=(j-1)/2 (units of gamma_rd)."""
    return LadderParams(3, RateParams(1.0, 1.0, 1.0, 30.0), FlippingModel.proportional(0.5, 0.5))


@pytest.fixture
def uniform_params():
    def make(n, omega=30.0, gamma_rg=1.0):
        return LadderParams(n, RateParams(1.0, gamma_rg, 1.0, omega), FlippingModel.none())

    return make


def half_max_width(x, y, i_peak):
    """Half width at half maximum around ``y[i_peak]`` by linear interpolation."""
    half = y[i_peak] / 2
    i = i_peak
    while y[i] > half:
        i += 1
    right = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])
    i = i_peak
    while y[i] > half:
        i -= 1
    left = x[i] + (half - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
    return (right - left) / 2


@pytest.fixture
def hwhm():
    return half_max_width


def nearest(x, value):
    return int(np.argmin(np.abs(np.asarray(x) - value)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
