"""A single driven Lambda-type atom: ground g, Rydberg r, pooling state d.

The probe couples g and r with Rabi frequency ``omega``. The Rydberg state
decays back to g (into the probe mode at ``gamma`` and elsewhere at
``gamma_rg``) and into the dark pooling state d at ``gamma_rd``.
Detunings are measured from the g-r resonance, ``delta = omega_probe - omega_gr``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import linsys
from .linsys import Generator, OperatorBasis, Spectrum

GG, RR, GR, RG, DD = ("g", "g"), ("r", "r"), ("g", "r"), ("r", "g"), ("d", "d")
SINGLE_BASIS = OperatorBasis((GG, RR, GR, RG, DD))

QUASI_STEADY_LIFETIMES = 8.0


class RegimeTag(enum.Enum):
    SFL = "strong-field"
    WFL = "weak-field"
    INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class RateParams:
    """Single-atom rates and drive strength (all in the same rate unit)."""

    gamma: float
    gamma_rg: float
    gamma_rd: float
    omega: float

    def __post_init__(self):
        for name in ("gamma", "gamma_rg", "gamma_rd", "omega"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v!r}")
        if self.Gamma <= 0:
            raise ValueError("total decay rate gamma + gamma_rg + gamma_rd must be positive")

    @property
    def Gamma(self) -> float:
        return self.gamma + self.gamma_rg + self.gamma_rd

    @property
    def excited_fraction(self) -> float:
        """Quasi-steady Rydberg share ``Omega^2 / (Gamma^2 + 2 Omega^2)`` of the g-r population."""
        return self.omega**2 / (self.Gamma**2 + 2 * self.omega**2)

    def regime(self, r_sfl=10.0, r_wfl=0.1) -> RegimeTag:
        r = self.omega / self.Gamma
        if r >= r_sfl:
            return RegimeTag.SFL
        if r <= r_wfl:
            return RegimeTag.WFL
        return RegimeTag.INTERMEDIATE


def rabi_from_photon_rate(f: float, gamma: float) -> float:
    """Rabi frequency ``2 sqrt(f gamma)`` set by a probe photon rate ``f``."""
    if f < 0 or gamma < 0:
        raise ValueError("photon rate and gamma must be non-negative")
    return 2.0 * math.sqrt(f * gamma)


def bloch_block(omega: float, decay_back: float, decay_total: float) -> np.ndarray:
    """4x4 generator on (gg, rr, gr, rg) for one driven, decaying two-level manifold.

    ``decay_back`` is the part of ``decay_total`` that returns to the ground state.
    """
    h = 0.5j * omega
    return np.array(
        [
            [0.0, decay_back, h, -h],
            [0.0, -decay_total, -h, h],
            [h, -h, -decay_total / 2, 0.0],
            [-h, h, 0.0, -decay_total / 2],
        ],
        dtype=complex,
    )


def single_atom_generator(p: RateParams) -> Generator:
    m = np.zeros((5, 5), dtype=complex)
    m[:4, :4] = bloch_block(p.omega, p.gamma + p.gamma_rg, p.Gamma)
    m[4, 1] = p.gamma_rd
    return Generator(SINGLE_BASIS, m)


def ground_state() -> np.ndarray:
    y = np.zeros(5, dtype=complex)
    y[0] = 1.0
    return y


def triplet_lineshape(delta, omega, Gamma, gamma_rd, gamma):
    """Three-Lorentzian quasi-steady lineshape for a driven manifold with total decay ``Gamma``.

    Centre line: half-width ``Gamma/2``. Sidebands at ``+-omega``: half-width
    ``(3 Gamma - gamma_rd)/4``.
    """
    delta = np.asarray(delta, dtype=float)
    a = 3 * Gamma - gamma_rd
    centre = (Gamma / 8) / (delta**2 + (Gamma / 2) ** 2)
    side = (a / 8) / (4 * (delta - omega) ** 2 + a**2 / 4) + (a / 8) / (4 * (delta + omega) ** 2 + a**2 / 4)
    return gamma * (centre + side)


def _check_quasi_steady(p: RateParams, t: float):
    if t < QUASI_STEADY_LIFETIMES / p.Gamma:
        warnings.warn(
            f"t={t:.3g} is below the quasi-steady threshold {QUASI_STEADY_LIFETIMES}/Gamma", stacklevel=3
        )


def sfl_spectrum_analytic(p: RateParams, t: float, delta_grid) -> Spectrum:
    if p.regime() is not RegimeTag.SFL:
        warnings.warn("parameters are outside the strong-field limit", stacklevel=2)
    _check_quasi_steady(p, t)
    delta = np.asarray(delta_grid, dtype=float)
    envelope = math.exp(-p.excited_fraction * p.gamma_rd * t)
    return Spectrum(delta, envelope * triplet_lineshape(delta, p.omega, p.Gamma, p.gamma_rd, p.gamma))


def wfl_spectrum_analytic(p: RateParams, t: float, delta_grid) -> Spectrum:
    """Single narrow line of half-width ``gamma_rd Omega^2 / Gamma^2`` (weak drive)."""
    if p.regime() is not RegimeTag.WFL:
        warnings.warn("parameters are outside the weak-field limit", stacklevel=2)
    if p.gamma_rd == 0:
        raise ValueError("weak-field line is degenerate (zero width) for gamma_rd = 0")
    _check_quasi_steady(p, t)
    delta = np.asarray(delta_grid, dtype=float)
    width = p.gamma_rd * p.omega**2 / p.Gamma**2
    envelope = math.exp(-p.excited_fraction * p.gamma_rd * t)
    return Spectrum(delta, envelope * p.gamma * p.gamma_rd * p.omega**4 / p.Gamma**4 / (delta**2 + width**2))


def default_delta_grid(p: RateParams, n_points=2048) -> np.ndarray:
    half = 1.5 * p.omega if p.omega > 0 else 5 * p.Gamma
    return linsys.symmetric_grid(half, n_points)


def state_at(p: RateParams, t: float, y0=None) -> np.ndarray:
    gen = single_atom_generator(p)
    return linsys.evolve_to(gen, ground_state() if y0 is None else y0, t)


def numeric_spectrum(p: RateParams, t: float, delta_grid, method="quadrature") -> Spectrum:
    """Scattered-light spectrum from regression of ``<s_rg(t) s_gr(t+tau)>``.

    The elastic (non-decaying) part of the correlation is excluded; it only
    exists for ``gamma_rd = 0``, where it is a delta function at ``delta = 0``.
    """
    gen = single_atom_generator(p)
    state = state_at(p, t)
    delta = np.asarray(delta_grid, dtype=float)
    if method == "resolvent":
        return linsys.spectrum_resolvent(gen, RG, GR, state, p.gamma, delta, drop_stationary=True)
    if method != "quadrature":
        raise ValueError(f"unknown spectrum method {method!r}")
    seed = linsys.seed_regression(gen, RG, state)
    seed = seed - linsys.stationary_projector(gen) @ seed
    tau = linsys.default_tau_grid(gen, seed, GR, np.max(np.abs(delta)), min_tau_max=12.0 / (p.Gamma / 2))
    corr = linsys.correlation(gen, RG, GR, state, tau, t_anchor=t, subtract_stationary=True)
    return linsys.spectrum_quadrature(corr, p.gamma, delta)
