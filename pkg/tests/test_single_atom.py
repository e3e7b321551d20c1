import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockade_ladder import linsys
from blockade_ladder.decomposition import evolve_pj
from blockade_ladder.ladder import LadderParams
from blockade_ladder.single_atom import (
    DD,
    GG,
    RR,
    RateParams,
    RegimeTag,
    default_delta_grid,
    ground_state,
    numeric_spectrum,
    rabi_from_photon_rate,
    sfl_spectrum_analytic,
    single_atom_generator,
    triplet_lineshape,
    wfl_spectrum_analytic,
)

from conftest import half_max_width, nearest


@pytest.mark.parametrize("f, gamma, omega", [(0.0, 1.0, 0.0), (25.0, 1.0, 10.0), (0.25, 1.0, 1.0), (0.5, 2.0, 2.0)])
def test_photon_rate(f, gamma, omega):
    assert rabi_from_photon_rate(f, gamma) == pytest.approx(omega)


def test_photon_rate_rejects_negative():
    with pytest.raises(ValueError):
        rabi_from_photon_rate(-1.0, 1.0)


def test_rate_params_validation():
    with pytest.raises(ValueError):
        RateParams(-1, 0, 0, 1)
    with pytest.raises(ValueError):
        RateParams(0, 0, 0, 1)
    with pytest.raises(ValueError):
        RateParams(1, 0, 0, math.nan)


def test_regime():
    assert RateParams(1, 0, 0, 30).regime() is RegimeTag.SFL
    assert RateParams(1, 1, 1, 0.1).regime() is RegimeTag.WFL
    assert RateParams(1, 1, 1, 3).regime() is RegimeTag.INTERMEDIATE


def test_undriven_decay_from_rydberg():
    p = RateParams(0.4, 0.5, 0.6, 0.0)
    gen = single_atom_generator(p)
    t = np.linspace(0, 30, 121)
    traj = linsys.integrate(gen, [0, 1, 0, 0, 0], t)
    assert np.allclose(traj[RR].real, np.exp(-p.Gamma * t), atol=1e-9)
    assert traj[GG][-1].real == pytest.approx((p.gamma + p.gamma_rg) / p.Gamma, abs=1e-8)
    assert traj[DD][-1].real == pytest.approx(p.gamma_rd / p.Gamma, abs=1e-8)


def test_sfl_excited_fraction():
    p = RateParams(1.0, 0.0, 0.0, 30.0)
    traj = linsys.integrate(single_atom_generator(p), ground_state(), np.linspace(0, 20, 2001))
    late = traj.t_grid > 12
    assert np.mean(traj[RR].real[late]) == pytest.approx(p.excited_fraction, abs=2e-3)
    assert p.excited_fraction == pytest.approx(0.5, abs=1e-3)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.0, 40.0), st.floats(0.1, 10.0)
)
def test_trace_conserved(gamma, gamma_rg, gamma_rd, omega, t_max):
    if gamma + gamma_rg + gamma_rd == 0:
        return
    p = RateParams(gamma, gamma_rg, gamma_rd, omega)
    gen = single_atom_generator(p)
    assert gen.conserves_population()
    traj = linsys.integrate(gen, ground_state(), np.linspace(0, t_max, 21))
    assert np.max(np.abs(traj.population_total() - 1)) <= 1e-8


def test_matches_cascade_at_one_atom():
    """gg + rr follows the one-rung cascade after the Rabi transient.

    The cascade drains at gamma_rd / 2 while the driven atom drains at
    x gamma_rd with x = Omega^2 / (Gamma^2 + 2 Omega^2) slightly below 1/2.
    The gap accumulates to about (1/2 - x) gamma_rd * max(t e^{-t/2}) ~ 1.8e-3.
    """
    p = RateParams(1.0, 1.0, 1.0, 30.0)
    t = np.linspace(0, 10, 2001)
    traj = linsys.integrate(single_atom_generator(p), ground_state(), t)
    atom = (traj[GG] + traj[RR]).real
    casc = evolve_pj(LadderParams(1, p), t).p[:, 1]
    # Average the Rabi ripple over one period before comparing.
    period = 2 * np.pi / p.omega
    n_win = int(round(period / (t[1] - t[0])))
    smooth = np.convolve(atom, np.ones(n_win) / n_win, mode="same")
    settled = (t >= 8 / p.Gamma) & (t <= t[-1] - period)
    gap = np.max(np.abs(smooth[settled] - casc[settled]))
    bound = (0.5 - p.excited_fraction) * p.gamma_rd * 2 / math.e
    assert gap <= 2e-3
    assert gap <= 1.2 * bound


def test_triplet_peak_ratio():
    g = 1.0
    s = triplet_lineshape(np.array([0.0, 30.0]), 30.0, g, 0.0, g)
    assert s[0] == pytest.approx(g / (2 * g), rel=2e-3)
    assert s[1] == pytest.approx(g / (6 * g), rel=2e-3)
    assert s[0] / s[1] == pytest.approx(3.0, rel=5e-3)


def test_sfl_envelope_vanishes():
    p = RateParams(1.0, 1.0, 1.0, 30.0)
    d = np.linspace(-45, 45, 301)
    early = sfl_spectrum_analytic(p, 5.0, d).values
    late = sfl_spectrum_analytic(p, 400.0, d).values
    assert np.max(late) <= 1e-60 * np.max(early)


def test_sfl_analytic_warns_out_of_regime():
    with pytest.warns(UserWarning):
        sfl_spectrum_analytic(RateParams(1, 1, 1, 3.0), 10.0, [0.0])
    with pytest.warns(UserWarning):
        sfl_spectrum_analytic(RateParams(1, 1, 1, 30.0), 0.1, [0.0])


def test_wfl_peak_value():
    p = RateParams(1.0, 1.0, 1.0, 0.15)
    t = 4.0
    s = wfl_spectrum_analytic(p, t, [0.0]).values[0]
    # gamma_rd = 1 here so the gamma / gamma_rd factor reduces to gamma
    assert s == pytest.approx(math.exp(-p.excited_fraction * p.gamma_rd * t) * p.gamma / p.gamma_rd)


def test_wfl_rejects_zero_pooling():
    with pytest.raises(ValueError):
        wfl_spectrum_analytic(RateParams(1.0, 1.0, 0.0, 0.1), 8.0, [0.0])


@pytest.mark.parametrize("omega_over_gamma", [1 / 20, 1 / 10])
def test_wfl_against_numeric(omega_over_gamma):
    p = RateParams(1.0, 1.0, 1.0, 3.0 * omega_over_gamma)
    t = 8 / p.Gamma
    width = p.gamma_rd * p.omega**2 / p.Gamma**2
    d = linsys.symmetric_grid(20 * width, 4001)
    num = numeric_spectrum(p, t, d, method="resolvent").values
    ana = wfl_spectrum_analytic(p, t, d).values
    i = int(np.argmax(num))
    assert half_max_width(d, num, i) == pytest.approx(width, rel=0.1)
    assert num[i] == pytest.approx(ana[nearest(d, 0)], rel=0.1)


def test_wfl_quadrature_matches_resolvent():
    p = RateParams(1.0, 1.0, 1.0, 0.3)
    d = linsys.symmetric_grid(0.1, 401)
    q = numeric_spectrum(p, 8 / 3, d).values
    r = numeric_spectrum(p, 8 / 3, d, method="resolvent").values
    assert np.max(np.abs(q - r)) <= 0.01 * np.max(r)


@pytest.mark.parametrize(
    "p, t",
    [(RateParams(1.0, 0.0, 0.0, 30.0), 8.0), (RateParams(1.0, 1.0, 1.0, 30.0), 8 / 3)],
    ids=["mollow", "pooling"],
)
def test_numeric_triplet(p, t):
    d = default_delta_grid(p, 4097)
    num = numeric_spectrum(p, t, d).values
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ana = sfl_spectrum_analytic(p, t, d).values
    assert np.max(np.abs(num - ana)) <= 0.03 * np.max(ana)
    ic = nearest(d, 0)
    isb = nearest(d, p.omega)
    isb += int(np.argmax(num[isb - 5 : isb + 6])) - 5
    assert half_max_width(d, num, ic) == pytest.approx(p.Gamma / 2, rel=0.05)
    assert half_max_width(d, num, isb) == pytest.approx((3 * p.Gamma - p.gamma_rd) / 4, rel=0.05)


def test_numeric_spectrum_rejects_unknown_method():
    with pytest.raises(ValueError):
        numeric_spectrum(RateParams(1, 1, 1, 30), 3.0, [0.0], method="fft")
