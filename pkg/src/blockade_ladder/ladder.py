"""Collective ladder model for N fully blockaded Lambda-type atoms.

Rung ``j`` (1..N) holds the symmetric manifold with ``j`` atoms still in
``|g>``: its ground state ``G_j`` and single-excitation Dicke state ``W_j``,
both summed over the ``binomial(N, j)`` ways of picking those atoms. Decay
``W_j -> G_{j-1}`` walks the ensemble down the ladder into the dark sink
``G_0 = |d...d>``. The generator has dimension ``4N + 1``.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linsys
from .linsys import Generator, OperatorBasis, Spectrum
from .single_atom import QUASI_STEADY_LIFETIMES, RateParams, bloch_block

SINK = ("G0", "G0")


def gg(j):
    return (f"G{j}", f"G{j}")


def ww(j):
    return (f"W{j}", f"W{j}")


def gw(j):
    return (f"G{j}", f"W{j}")


def wg(j):
    return (f"W{j}", f"G{j}")


def multiplicity(n: int, j: int) -> int:
    """Number of ground configurations with ``j`` of ``n`` atoms in ``|g>``."""
    if not 0 <= j <= n:
        raise ValueError(f"rung index j={j} outside 0..{n}")
    return math.comb(n, j)


def decay_multiplicity(j: int) -> int:
    """Number of rung-(j-1) ground states one ``W_j`` configuration decays into."""
    if j < 1:
        raise ValueError("decay multiplicity needs j >= 1")
    return j


@dataclass(frozen=True)
class FlippingModel:
    """Extra decay through unsymmetrical states, as rates ``D_rg^j`` and ``D_rd^j``.

    Use the constructors :meth:`none`, :meth:`proportional` and :meth:`table`.
    """

    kind: str = "none"
    c_rg: float = 0.0
    c_rd: float = 0.0
    d_rg: tuple = ()
    d_rd: tuple = ()

    def __post_init__(self):
        if self.kind not in ("none", "proportional", "table"):
            raise ValueError(f"unknown flipping model {self.kind!r}")
        if self.c_rg < 0 or self.c_rd < 0:
            raise ValueError("flipping rates must be non-negative")
        if self.kind == "table":
            if len(self.d_rg) != len(self.d_rd) or not self.d_rg:
                raise ValueError("flipping table needs equal-length, non-empty D_rg and D_rd")
            if min(self.d_rg) < 0 or min(self.d_rd) < 0:
                raise ValueError("flipping rates must be non-negative")
            if self.d_rg[0] != 0 or self.d_rd[0] != 0:
                raise ValueError("D^1 must vanish: a single ground atom has no unsymmetrical partner")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def proportional(cls, c_rg: float, c_rd: float):
        return cls("proportional", c_rg=float(c_rg), c_rd=float(c_rd))

    @classmethod
    def table(cls, d_rg, d_rd):
        return cls("table", d_rg=tuple(float(x) for x in d_rg), d_rd=tuple(float(x) for x in d_rd))

    def rates(self, n: int):
        """Arrays ``(D_rg^j, D_rd^j)`` for ``j = 1..n``."""
        if self.kind == "none":
            return np.zeros(n), np.zeros(n)
        if self.kind == "proportional":
            k = np.arange(n, dtype=float)
            return self.c_rg * k, self.c_rd * k
        if len(self.d_rg) < n:
            raise ValueError(f"flipping table has {len(self.d_rg)} rungs, need {n}")
        return np.array(self.d_rg[:n]), np.array(self.d_rd[:n])

    def describe(self) -> str:
        if self.kind == "proportional":
            return f"prop:{self.c_rg:g},{self.c_rd:g}"
        if self.kind == "table":
            return "table:" + ";".join(f"{a:g},{b:g}" for a, b in zip(self.d_rg, self.d_rd))
        return "none"


@dataclass(frozen=True)
class CollectiveRates:
    """Per-rung rates, index ``j - 1`` for rung ``j``."""

    omega_j: np.ndarray
    gamma_rg_j: np.ndarray
    gamma_rd_j: np.ndarray

    @property
    def Gamma_j(self) -> np.ndarray:
        return self.gamma_rg_j + self.gamma_rd_j

    @property
    def excited_fraction_j(self) -> np.ndarray:
        return self.omega_j**2 / (self.Gamma_j**2 + 2 * self.omega_j**2)


@dataclass(frozen=True)
class LadderParams:
    n_atoms: int
    rates: RateParams
    flipping: FlippingModel = field(default_factory=FlippingModel.none)

    def __post_init__(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError("n_atoms must be an integer >= 1")
        # the table must cover every rung
        self.flipping.rates(self.n_atoms)

    def collective(self) -> CollectiveRates:
        n, r = self.n_atoms, self.rates
        j = np.arange(1, n + 1, dtype=float)
        d_rg, d_rd = self.flipping.rates(n)
        return CollectiveRates(
            omega_j=np.sqrt(j) * r.omega,
            gamma_rg_j=r.gamma_rg + j * r.gamma + d_rg,
            gamma_rd_j=r.gamma_rd + d_rd,
        )

    def sfl_ratios(self) -> np.ndarray:
        """``sqrt(j) Omega / Gamma_j`` for each rung; large values mean strong field."""
        c = self.collective()
        return c.omega_j / c.Gamma_j

    def quasi_steady_time(self) -> float:
        return QUASI_STEADY_LIFETIMES / float(self.collective().Gamma_j.min())


def ladder_basis(n: int) -> OperatorBasis:
    labels = []
    for j in range(1, n + 1):
        labels += [gg(j), ww(j), gw(j), wg(j)]
    labels.append(SINK)
    return OperatorBasis(tuple(labels))


def ladder_generator(p: LadderParams) -> Generator:
    n = p.n_atoms
    c = p.collective()
    m = np.zeros((4 * n + 1, 4 * n + 1), dtype=complex)
    for j in range(1, n + 1):
        o = 4 * (j - 1)
        k = j - 1
        m[o : o + 4, o : o + 4] = bloch_block(c.omega_j[k], c.gamma_rg_j[k], c.Gamma_j[k])
        # W_j decays into G_{j-1} (or into the sink for j = 1)
        target = 4 * (j - 2) if j > 1 else 4 * n
        m[target, o + 1] += c.gamma_rd_j[k]
    return Generator(ladder_basis(n), m)


@dataclass(frozen=True)
class LadderState:
    """Rung populations and coherences; arrays indexed by ``j - 1``."""

    g_pop: np.ndarray
    w_pop: np.ndarray
    coh: np.ndarray  # <G_j W_j>
    g0_pop: float

    @property
    def n_atoms(self) -> int:
        return len(self.g_pop)

    @classmethod
    def from_vector(cls, y) -> "LadderState":
        y = np.asarray(y)
        n = (len(y) - 1) // 4
        body = y[:-1].reshape(n, 4)
        return cls(body[:, 0].real.copy(), body[:, 1].real.copy(), body[:, 2].copy(), float(y[-1].real))

    def to_vector(self) -> np.ndarray:
        n = self.n_atoms
        y = np.zeros(4 * n + 1, dtype=complex)
        body = y[:-1].reshape(n, 4)
        body[:, 0] = self.g_pop
        body[:, 1] = self.w_pop
        body[:, 2] = self.coh
        body[:, 3] = np.conj(self.coh)
        y[-1] = self.g0_pop
        return y

    @classmethod
    def initial(cls, n: int) -> "LadderState":
        """All atoms in ``|g>``: the whole population on ``G_N``."""
        g = np.zeros(n)
        g[-1] = 1.0
        return cls(g, np.zeros(n), np.zeros(n, dtype=complex), 0.0)

    @classmethod
    def diagonal(cls, p_j) -> "LadderState":
        """Ground-state populations ``p_j`` (index 0 is the sink), nothing excited."""
        p_j = np.asarray(p_j, dtype=float)
        n = len(p_j) - 1
        return cls(p_j[1:].copy(), np.zeros(n), np.zeros(n, dtype=complex), float(p_j[0]))

    def total(self) -> float:
        return float(self.g_pop.sum() + self.w_pop.sum() + self.g0_pop)


def pj_numeric(state: LadderState) -> np.ndarray:
    """Rung populations ``p_j = <G_jG_j> + <W_jW_j>`` for ``j = 0..N`` (``p_0`` is the sink)."""
    return np.concatenate([[state.g0_pop], state.g_pop + state.w_pop])


class LadderTrajectory(Sequence):
    """Time series of :class:`LadderState` backed by one expectation trajectory."""

    def __init__(self, params: LadderParams, traj: linsys.ExpectationTrajectory):
        self.params = params
        self.raw = traj
        self.t_grid = traj.t_grid

    def __len__(self):
        return len(self.t_grid)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        return LadderState.from_vector(self.raw.values[i])

    def _body(self):
        n = self.params.n_atoms
        return self.raw.values[:, :-1].reshape(len(self), n, 4)

    @property
    def g_pop(self):
        return self._body()[:, :, 0].real

    @property
    def w_pop(self):
        return self._body()[:, :, 1].real

    @property
    def coh(self):
        return self._body()[:, :, 2]

    @property
    def g0_pop(self):
        return self.raw.values[:, -1].real

    def pj(self) -> np.ndarray:
        """Matrix of ``p_j(t)``, shape ``(len(t_grid), N + 1)``."""
        return np.column_stack([self.g0_pop, self.g_pop + self.w_pop])

    def trace(self) -> np.ndarray:
        return self.raw.population_total().real

    def rydberg_fraction(self) -> np.ndarray:
        """``P_r = (1/N) sum_j <W_jW_j>``."""
        return self.w_pop.sum(axis=1) / self.params.n_atoms


def evolve_ladder(p: LadderParams, t_grid, initial: Optional[LadderState] = None) -> LadderTrajectory:
    state = LadderState.initial(p.n_atoms) if initial is None else initial
    if state.n_atoms != p.n_atoms:
        raise ValueError("initial state has the wrong number of rungs")
    traj = linsys.integrate(ladder_generator(p), state.to_vector(), t_grid)
    return LadderTrajectory(p, traj)


def state_at(p: LadderParams, t: float, initial: Optional[LadderState] = None) -> np.ndarray:
    state = LadderState.initial(p.n_atoms) if initial is None else initial
    return linsys.evolve_to(ladder_generator(p), state.to_vector(), t)


def _seeding_check(p: LadderParams, t: float):
    threshold = p.quasi_steady_time()
    if t < threshold:
        warnings.warn(f"seed time t={t:.3g} below quasi-steady threshold {threshold:.3g}", stacklevel=3)


def default_delta_grid(p: LadderParams, n_points=2048) -> np.ndarray:
    r = p.rates
    half = 1.5 * math.sqrt(p.n_atoms) * r.omega if r.omega > 0 else 5 * r.Gamma
    return linsys.symmetric_grid(half, n_points)


def rung_spectra(p: LadderParams, t: float, delta_grid, method="quadrature") -> list:
    """Per-rung terms ``j gamma Re int <W_jG_j(t) G_jW_j(t+tau)> e^{-i delta tau} dtau``.

    Each term is regressed over the full ladder generator.
    """
    _seeding_check(p, t)
    gen = ladder_generator(p)
    state = state_at(p, t)
    delta = np.asarray(delta_grid, dtype=float)
    c = p.collective()
    out = []
    for j in range(1, p.n_atoms + 1):
        pref = j * p.rates.gamma
        if method == "resolvent":
            out.append(linsys.spectrum_resolvent(gen, wg(j), gw(j), state, pref, delta, drop_stationary=True))
            continue
        if method != "quadrature":
            raise ValueError(f"unknown spectrum method {method!r}")
        seed = linsys.seed_regression(gen, wg(j), state)
        seed = seed - linsys.stationary_projector(gen) @ seed
        tau = linsys.default_tau_grid(
            gen, seed, gw(j), np.max(np.abs(delta)), min_tau_max=12.0 / (c.Gamma_j.min() / 2)
        )
        corr = linsys.correlation(gen, wg(j), gw(j), state, tau, t_anchor=t, subtract_stationary=True)
        out.append(linsys.spectrum_quadrature(corr, pref, delta))
    return out


def ensemble_spectrum_numeric(p: LadderParams, t: float, delta_grid, method="quadrature") -> Spectrum:
    """Quasi-steady spectrum of the field scattered into the probe mode, cross-rung terms dropped."""
    terms = rung_spectra(p, t, delta_grid, method)
    total = terms[0]
    for s in terms[1:]:
        total = total + s
    return total


@dataclass(frozen=True)
class G2Result:
    tau_grid: np.ndarray
    unnormalized: np.ndarray
    normalized: np.ndarray
    intensity_t1: float
    intensity_tau: np.ndarray


def g2_numeric(p: LadderParams, t1: float, tau_grid) -> G2Result:
    """Intensity correlation ``sum_j gamma^2 j^2 <W_jG_j(t1) W_jW_j(t1+tau) G_jW_j(t1)>``.

    Normalised by ``I(t1) I(t1+tau)`` with ``I = sum_j gamma j <W_jW_j>``.
    """
    _seeding_check(p, t1)
    gen = ladder_generator(p)
    state = state_at(p, t1)
    tau_grid = np.asarray(tau_grid, dtype=float)
    gamma = p.rates.gamma
    g2 = np.zeros(tau_grid.size)
    for j in range(1, p.n_atoms + 1):
        corr = linsys.correlation(gen, wg(j), ww(j), state, tau_grid, t_anchor=t1, c_label=gw(j))
        g2 += gamma**2 * j**2 * corr.values.real
    after = linsys.integrate(gen, state, tau_grid)
    jj = np.arange(1, p.n_atoms + 1)
    w_idx = [gen.basis.index(ww(j)) for j in jj]
    intensity = gamma * (after.values[:, w_idx].real @ jj)
    i1 = float(intensity[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = g2 / (i1 * intensity)
    return G2Result(tau_grid, g2, normalized, i1, intensity)
