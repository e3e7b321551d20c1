"""Reduced rung-population model and its closed-form consequences.

In the strong-field limit each rung is a driven two-level system sitting at
half excitation, so the rung populations ``p_j`` obey a simple cascade::

    dp_j/dt = -(gamma_rd^j p_j - gamma_rd^{j+1} p_{j+1}) / 2,    p_{N+1} = 0

With uniform ``gamma_rd^j = gamma_rd`` this is a Poisson process of rate
``gamma_rd / 2`` stepping down from rung N.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln

from . import linsys
from .ladder import LadderParams
from .linsys import Generator, OperatorBasis, Spectrum
from .single_atom import triplet_lineshape

SFL_RATIO = 10.0
REVIVAL_WINDOW = 0.1


@dataclass(frozen=True)
class PjTrajectory:
    t_grid: np.ndarray
    p: np.ndarray  # shape (len(t_grid), N + 1), column j is p_j

    @property
    def n_atoms(self) -> int:
        return self.p.shape[1] - 1

    def at(self, t: float) -> np.ndarray:
        """Linear interpolation of every ``p_j`` to time ``t``."""
        return np.array([np.interp(t, self.t_grid, col) for col in self.p.T])


@dataclass(frozen=True)
class FractionReport:
    t_grid: np.ndarray
    P_d: np.ndarray
    P_G0: np.ndarray
    P_r: np.ndarray
    dPd_dt: np.ndarray
    dPd_dt_identity: np.ndarray
    P_r_oscillation: np.ndarray

    @property
    def identity_residual(self) -> np.ndarray:
        return self.dPd_dt - self.dPd_dt_identity


def cascade_generator(p: LadderParams) -> Generator:
    """Linear generator of the ``p_j`` cascade on labels ``(P0..PN)``."""
    n = p.n_atoms
    g_rd = p.collective().gamma_rd_j
    m = np.zeros((n + 1, n + 1))
    for j in range(1, n + 1):
        m[j, j] -= g_rd[j - 1] / 2
        m[j - 1, j] += g_rd[j - 1] / 2
    basis = OperatorBasis(tuple((f"P{j}", f"P{j}") for j in range(n + 1)))
    return Generator(basis, m)


def evolve_pj(p: LadderParams, t_grid) -> PjTrajectory:
    """Integrate the cascade from ``p_N = 1``; ``p_0`` is fixed by closure."""
    n = p.n_atoms
    y0 = np.zeros(n + 1)
    y0[n] = 1.0
    traj = linsys.integrate(cascade_generator(p), y0, t_grid)
    pj = traj.values.real.copy()
    pj[:, 0] = 1.0 - pj[:, 1:].sum(axis=1)
    return PjTrajectory(traj.t_grid, pj)


def pj_at(p: LadderParams, t: float) -> np.ndarray:
    if t == 0:
        return evolve_pj(p, [0.0]).p[0]
    return evolve_pj(p, [0.0, t]).p[-1]


def _poisson_terms(n: int, gamma_rd: float, t) -> np.ndarray:
    """``pi_k(lam) = lam^k e^-lam / k!`` for ``k = 0..n-1`` and ``lam = gamma_rd t / 2``; shape (len(t), n)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam = gamma_rd * t / 2
    k = np.arange(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pi = k[None, :] * np.log(lam)[:, None] - gammaln(k + 1)[None, :] - lam[:, None]
    out = np.exp(log_pi)
    # lam = 0: only the k = 0 term survives
    zero = lam == 0
    out[zero] = 0.0
    out[zero, 0] = 1.0
    return out


def pj_closed_form(n: int, gamma_rd: float, t) -> np.ndarray:
    """Uniform-rate solution ``p_j = (gamma_rd t)^{N-j} e^{-gamma_rd t/2} / (2^{N-j} (N-j)!)``.

    Returns shape ``(N + 1,)`` for scalar ``t``, else ``(len(t), N + 1)``.
    """
    scalar = np.ndim(t) == 0
    pi = _poisson_terms(n, gamma_rd, t)
    p = np.empty((pi.shape[0], n + 1))
    p[:, 1:] = pi[:, ::-1]  # p_j = pi_{N-j}
    p[:, 0] = 1.0 - p[:, 1:].sum(axis=1)
    return p[0] if scalar else p


def pj_closed_form_rate(n: int, gamma_rd: float, t) -> np.ndarray:
    """Exact time derivative of :func:`pj_closed_form`."""
    scalar = np.ndim(t) == 0
    pi = _poisson_terms(n, gamma_rd, t)
    dpi = np.empty_like(pi)
    dpi[:, 0] = -pi[:, 0]
    dpi[:, 1:] = pi[:, :-1] - pi[:, 1:]
    dpi *= gamma_rd / 2
    d = np.empty((pi.shape[0], n + 1))
    d[:, 1:] = dpi[:, ::-1]
    d[:, 0] = -d[:, 1:].sum(axis=1)
    return d[0] if scalar else d


def spectrum_analytic(p: LadderParams, t: float, delta_grid) -> Spectrum:
    """``sum_j j p_j(t) A[Omega_j, Gamma_j](delta)`` with ``p_j`` from the cascade."""
    if np.any(p.sfl_ratios() < SFL_RATIO):
        warnings.warn("some rungs are outside the strong-field limit", stacklevel=2)
    if t < p.quasi_steady_time():
        warnings.warn(f"t={t:.3g} below quasi-steady threshold {p.quasi_steady_time():.3g}", stacklevel=2)
    pj = pj_at(p, t)
    return spectrum_from_populations(p, pj, delta_grid)


def spectrum_from_populations(p: LadderParams, pj, delta_grid) -> Spectrum:
    delta = np.asarray(delta_grid, dtype=float)
    c = p.collective()
    s = np.zeros_like(delta)
    for j in range(1, p.n_atoms + 1):
        k = j - 1
        s += j * pj[j] * triplet_lineshape(delta, c.omega_j[k], c.Gamma_j[k], c.gamma_rd_j[k], p.rates.gamma)
    return Spectrum(delta, s)


def total_power(p: LadderParams, pj) -> float:
    """Frequency-integrated analytic spectrum; each lineshape integrates to ``pi gamma / 2``."""
    j = np.arange(1, p.n_atoms + 1)
    return float(np.pi * p.rates.gamma / 2 * np.sum(j * np.asarray(pj)[1:]))


def fractions(traj: PjTrajectory, p: LadderParams) -> FractionReport:
    """Pooled, all-pooled and Rydberg fractions from rung populations.

    ``traj`` may come from the cascade or from the full ladder
    (``PjTrajectory(t, ladder_traj.pj())``).
    """
    n = p.n_atoms
    if traj.n_atoms != n:
        raise ValueError("trajectory and parameters disagree on N")
    pj = traj.p[:, 1:]
    j = np.arange(1, n + 1)
    P_d = 1.0 - pj @ j / n
    P_G0 = 1.0 - pj.sum(axis=1)
    P_r = pj.sum(axis=1) / (2 * n)
    t = traj.t_grid
    if t.size >= 3:
        dPd = np.gradient(P_d, t, edge_order=2)
    elif t.size == 2:
        dPd = np.full(2, (P_d[1] - P_d[0]) / (t[1] - t[0]))
    else:
        dPd = np.full(t.size, np.nan)
    ident = p.rates.gamma_rd / (2 * n) * (1.0 - P_G0)
    c = p.collective()
    osc = -(pj[:, -1] / (2 * n)) * np.cos(c.omega_j[-1] * t) * np.exp(-3 * c.gamma_rg_j[-1] * t / 4)
    return FractionReport(t, P_d, P_G0, P_r, dPd, ident, osc)


def relaxation_time_closed_form(n: int, gamma_rd: float) -> float:
    """Onset of the all-pooled population, via Stirling: ``(2N/g) (2 pi N)^{1/2N} (1 - 2/sqrt N)``."""
    if gamma_rd <= 0:
        raise ValueError("gamma_rd must be positive")
    if 1 - 2 / math.sqrt(n) <= 0:
        raise ValueError(
            f"closed form is non-positive for N={n} (needs N >= 5); use relaxation_time_numeric instead"
        )
    return 2 * n / gamma_rd * (2 * math.pi * n) ** (1 / (2 * n)) * (1 - 2 / math.sqrt(n))


def onset_profile(n: int, eta):
    """``f[N, eta] = eta^N exp(-N eta / e)``: the leading all-pooled term against ``t / t_c``."""
    eta = np.asarray(eta, dtype=float)
    return np.exp(n * (np.log(eta) - eta / math.e))


def onset_profile_slope(n: int, eta):
    eta = np.asarray(eta, dtype=float)
    return onset_profile(n, eta) * n * (1 / eta - 1 / math.e)


def steepest_onset(n: int) -> float:
    """``eta`` at which ``d f / d eta`` peaks: ``e - e / sqrt(N)``."""
    return math.e - math.e / math.sqrt(n)


@dataclass(frozen=True)
class RelaxationDiagnostics:
    n_atoms: int
    t_r: float
    t_c: float
    t_c_stirling: float
    eta_star: float
    eta_onset: float


def crossing_time(n: int, gamma_rd: float, xtol=1e-13) -> float:
    """Solve ``(gamma_rd t / 2)^N / N! = 1`` by bisection on the logarithm."""

    def g(t):
        return n * math.log(gamma_rd * t / 2) - math.lgamma(n + 1)

    hi = 2.0 * (n + 1) / gamma_rd  # (N!)^{1/N} < N + 1
    lo = hi * 1e-6
    try:
        return bisect(g, lo, hi, xtol=xtol * hi, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise linsys.NumericalError(f"bisection for t_c failed: {exc}") from exc


def relaxation_time_numeric(n: int, gamma_rd: float) -> RelaxationDiagnostics:
    """Relaxation time from the exact crossing time ``t_c`` and the onset criterion ``t_r = (e - 2e/sqrt N) t_c``."""
    if n < 2:
        raise ValueError("relaxation time needs N >= 2")
    if gamma_rd <= 0:
        raise ValueError("gamma_rd must be positive")
    t_c = crossing_time(n, gamma_rd)
    stirling = 2 * n / (math.e * gamma_rd) * (2 * math.pi * n) ** (1 / (2 * n))
    eta_onset = math.e - 2 * math.e / math.sqrt(n)
    return RelaxationDiagnostics(n, eta_onset * t_c, t_c, stirling, steepest_onset(n), eta_onset)


@dataclass(frozen=True)
class RevivalResult:
    dt_grid: np.ndarray
    P_r: np.ndarray
    window: float
    within_window: bool


def rabi_revival(pj, p: LadderParams, dt_grid) -> RevivalResult:
    """Rydberg fraction after the drive is switched back on over a decayed diagonal state.

    ``P_r(dt) = (1/2N) sum_j p_j (1 - cos(sqrt(j) Omega dt))``; valid while
    ``dt`` stays well below every ``1/Gamma_j``. ``window`` is the cap used for
    that check (``0.1 / max Gamma_j``).
    """
    pj = np.asarray(pj, dtype=float)
    n = p.n_atoms
    if pj.shape != (n + 1,):
        raise ValueError(f"expected {n + 1} rung populations")
    dt = np.asarray(dt_grid, dtype=float)
    c = p.collective()
    window = REVIVAL_WINDOW / float(c.Gamma_j.max())
    inside = bool(np.max(dt, initial=0.0) <= window)
    if not inside:
        warnings.warn(f"revival grid extends beyond dt = {window:.3g}", stacklevel=2)
    osc = 1 - np.cos(np.outer(dt, c.omega_j))
    return RevivalResult(dt, osc @ pj[1:] / (2 * n), window, inside)
