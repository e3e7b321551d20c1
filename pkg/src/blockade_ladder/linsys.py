"""Linear expectation-value dynamics over a finite transition-operator basis.

A model is a square matrix ``M`` acting on the vector of expectation values
``<sigma_ab>`` of a set of transition operators ``sigma_ab = |a><b|``::

    d<sigma_k>/dt = sum_l M[k, l] <sigma_l>

The same matrix drives two-time correlations through the quantum regression
theorem, so one engine covers trajectories, correlation functions and power
spectra.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.integrate import simpson, solve_ivp

Label = Tuple[str, str]

RTOL = 1e-9
ATOL = 1e-12
THREADS_ENV = "BLOCKADE_LADDER_THREADS"
SPARSE_MIN_SIZE = 64
SPARSE_MAX_DENSITY = 0.1


class NumericalError(RuntimeError):
    """Base class for failures of the numerical pipeline."""


class IntegrationError(NumericalError):
    """The adaptive integrator could not advance (e.g. step-size underflow)."""

    def __init__(self, message, t_fail=None):
        super().__init__(message)
        self.t_fail = t_fail


class DecayError(NumericalError):
    """A correlation function has not decayed enough to be transformed."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularResolventError(NumericalError):
    """``(i delta - M)`` is singular or too badly conditioned to invert."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


def format_label(label: Label) -> str:
    a, b = label
    if len(a) == 1 and len(b) == 1:
        return f"s_{a}{b}"
    return f"s_{a},{b}"


@dataclass(frozen=True)
class OperatorBasis:
    """Ordered set of transition labels ``(a, b)`` standing for ``|a><b|``."""

    labels: Tuple[Label, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple((str(a), str(b)) for a, b in self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError("basis labels must be unique")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def states(self) -> Tuple[str, ...]:
        seen = {}
        for a, b in self.labels:
            seen.setdefault(a, None)
            seen.setdefault(b, None)
        return tuple(seen)

    def __contains__(self, label) -> bool:
        return tuple(label) in self._index

    def index(self, label: Label) -> int:
        try:
            return self._index[tuple(label)]
        except KeyError:
            raise KeyError(f"unknown basis label {label!r}") from None

    @property
    def population_indices(self) -> np.ndarray:
        return np.array([i for i, (a, b) in enumerate(self.labels) if a == b], dtype=int)

    @staticmethod
    def product(*labels: Label) -> Optional[Label]:
        """Operator product of transition labels; ``None`` is the zero operator."""
        a, b = labels[0]
        for c, d in labels[1:]:
            if b != c:
                return None
            b = d
        return (a, b)


@dataclass(frozen=True)
class Generator:
    """Constant linear generator ``M`` over an :class:`OperatorBasis`."""

    basis: OperatorBasis
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.basis.size
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match basis size {n}")
        if not np.all(np.isfinite(m)):
            raise ValueError("generator matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.basis.size

    def population_flux(self) -> np.ndarray:
        """Row vector ``1_pop^T M``; identically zero when total population is conserved."""
        return self.matrix[self.basis.population_indices].sum(axis=0)

    def conserves_population(self, atol=1e-12) -> bool:
        return bool(np.all(np.abs(self.population_flux()) <= atol))


@dataclass(frozen=True)
class ExpectationTrajectory:
    basis: OperatorBasis
    t_grid: np.ndarray
    values: np.ndarray  # shape (len(t_grid), basis.size)

    def __getitem__(self, label) -> np.ndarray:
        return self.values[:, self.basis.index(label)]

    def at(self, i: int) -> np.ndarray:
        return self.values[i]

    def population_total(self) -> np.ndarray:
        return self.values[:, self.basis.population_indices].sum(axis=1)


@dataclass(frozen=True)
class CorrelationFunction:
    tau_grid: np.ndarray
    values: np.ndarray
    t_anchor: float = 0.0


@dataclass(frozen=True)
class Spectrum:
    delta_grid: np.ndarray
    values: np.ndarray

    @property
    def peak(self) -> float:
        return float(np.max(self.values))

    def __add__(self, other: "Spectrum") -> "Spectrum":
        if not np.array_equal(self.delta_grid, other.delta_grid):
            raise ValueError("spectra live on different detuning grids")
        return Spectrum(self.delta_grid, self.values + other.values)

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.delta_grid, self.values * factor)


def _as_vector(gen: Generator, y0) -> np.ndarray:
    y0 = np.asarray(y0, dtype=complex)
    if y0.shape != (gen.size,):
        raise ValueError(f"initial vector has shape {y0.shape}, expected ({gen.size},)")
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial vector has non-finite entries")
    return y0


def _rhs_operator(m: np.ndarray):
    # ladder generators are block-banded; CSR pays off once they get large
    if m.shape[0] >= SPARSE_MIN_SIZE and np.count_nonzero(m) <= SPARSE_MAX_DENSITY * m.size:
        return sparse.csr_matrix(m)
    return m


def integrate(gen: Generator, y0, t_grid, rtol=RTOL, atol=ATOL) -> ExpectationTrajectory:
    """Solve ``dy/dt = M y`` on ``t_grid`` (which must start at 0) with DOP853."""
    y0 = _as_vector(gen, y0)
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly ascending")

    values = np.empty((t_grid.size, gen.size), dtype=complex)
    values[0] = y0
    if t_grid.size > 1:
        m = _rhs_operator(gen.matrix)
        sol = solve_ivp(
            lambda t, y: m @ y,
            (0.0, float(t_grid[-1])),
            y0,
            method="DOP853",
            t_eval=t_grid,
            rtol=rtol,
            atol=atol,
        )
        if sol.status != 0:
            t_fail = float(sol.t[-1]) if sol.t.size else 0.0
            raise IntegrationError(f"integration failed at t={t_fail:.6g}: {sol.message}", t_fail)
        values[1:] = sol.y.T[1:]
    values.setflags(write=False)
    return ExpectationTrajectory(gen.basis, t_grid, values)


def evolve_to(gen: Generator, y0, t: float, rtol=RTOL, atol=ATOL) -> np.ndarray:
    """State vector at a single time ``t``."""
    if t == 0:
        return _as_vector(gen, y0).copy()
    return integrate(gen, y0, [0.0, t], rtol, atol).values[-1]


def seed_regression(gen: Generator, a_label: Label, state, c_label: Optional[Label] = None) -> np.ndarray:
    """Equal-time seed ``<A sigma_k>`` (or ``<A sigma_k C>``) for every basis label.

    Products that land outside the basis are taken as zero.
    """
    basis = gen.basis
    for lab in (a_label, c_label):
        if lab is not None and lab not in basis:
            raise KeyError(f"unknown basis label {lab!r}")
    state = _as_vector(gen, state)
    seed = np.zeros(basis.size, dtype=complex)
    for k, lab in enumerate(basis.labels):
        ops = (a_label, lab) if c_label is None else (a_label, lab, c_label)
        prod = OperatorBasis.product(*ops)
        if prod is not None and prod in basis:
            seed[k] = state[basis.index(prod)]
    return seed


def stationary_projector(gen: Generator, tol=1e-10) -> np.ndarray:
    """Spectral projector onto the kernel of ``M`` (zero matrix if ``M`` is invertible)."""
    m = gen.matrix
    scale = max(1.0, float(np.max(np.abs(m))))
    _, s_r, vh_r = np.linalg.svd(m)
    right = vh_r[s_r <= tol * scale].conj().T
    _, s_l, vh_l = np.linalg.svd(m.T)
    left = vh_l[s_l <= tol * scale].conj().T
    if right.shape[1] == 0:
        return np.zeros_like(m)
    if right.shape[1] != left.shape[1]:
        raise NumericalError("left and right kernels of the generator differ in dimension")
    overlap = left.T @ right
    return right @ np.linalg.solve(overlap, left.T)


def decay_horizon(gen: Generator, seed, b_label: Label, n_lifetimes=12.0, weight_tol=1e-6):
    """Delay range and fastest frequency needed to resolve ``y_B(tau)``.

    The seed is expanded in eigenmodes of ``M``; modes whose contribution to
    the observed component is below ``weight_tol`` of the total are ignored.
    Returns ``(tau_max, fastest_rate)`` where ``fastest_rate`` is the largest
    ``|lambda|`` among relevant modes.
    """
    seed = _as_vector(gen, seed)
    evals, right = np.linalg.eig(gen.matrix)
    coeffs = np.linalg.solve(right, seed)
    weights = np.abs(right[gen.basis.index(b_label)] * coeffs)
    total = weights.sum()
    if total == 0:
        return 0.0, 0.0
    rates = -evals.real
    relevant = (weights > weight_tol * total) & (rates > 1e-12 * max(1.0, np.abs(evals).max()))
    if not np.any(relevant):
        return 0.0, 0.0
    return n_lifetimes / rates[relevant].min(), float(np.abs(evals[relevant]).max())


def correlation(
    gen: Generator,
    a_label: Label,
    b_label: Label,
    state,
    tau_grid,
    t_anchor=0.0,
    c_label: Optional[Label] = None,
    subtract_stationary=False,
    rtol=RTOL,
    atol=ATOL,
) -> CorrelationFunction:
    """Two-time correlation ``<A(t) B(t+tau) [C(t)]>`` by quantum regression.

    With ``subtract_stationary`` the non-decaying part of the seed (the
    coherent, elastic component) is removed before evolution.
    """
    if b_label not in gen.basis:
        raise KeyError(f"unknown basis label {b_label!r}")
    seed = seed_regression(gen, a_label, state, c_label)
    if subtract_stationary:
        seed = seed - stationary_projector(gen) @ seed
    traj = integrate(gen, seed, tau_grid, rtol, atol)
    values = np.array(traj[b_label])
    values[0] = seed[gen.basis.index(b_label)]
    return CorrelationFunction(traj.t_grid, values, float(t_anchor))


def n_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def _chunks(n, size):
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def spectrum_quadrature(
    corr: CorrelationFunction, prefactor: float, delta_grid, cutoff=1e-3, chunk=128
) -> Spectrum:
    """``prefactor * Re int_0^tau_max C(tau) exp(-i delta tau) dtau`` by Simpson's rule."""
    tau = np.asarray(corr.tau_grid, dtype=float)
    c = np.asarray(corr.values, dtype=complex)
    delta = np.asarray(delta_grid, dtype=float)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        return Spectrum(delta, np.zeros_like(delta))
    residual = abs(c[-1]) / scale
    if residual > cutoff:
        raise DecayError(
            f"correlation not decayed at tau_max={tau[-1]:.4g}: residual fraction {residual:.3g} > {cutoff:.3g}",
            residual,
        )

    out = np.empty(delta.size)

    def work(sl):
        phase = np.exp(-1j * np.outer(delta[sl], tau))
        out[sl] = simpson(phase * c, x=tau, axis=1).real

    slices = _chunks(delta.size, chunk)
    workers = n_threads()
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(work, slices))
    else:
        for sl in slices:
            work(sl)
    return Spectrum(delta, prefactor * out)


def spectrum_resolvent(
    gen: Generator,
    a_label: Label,
    b_label: Label,
    state,
    prefactor: float,
    delta_grid,
    drop_stationary=False,
    stationary_tol=1e-8,
    max_condition=1e12,
) -> Spectrum:
    """``prefactor * Re[e_B^T (i delta - M)^-1 y(0)]`` evaluated in closed form.

    A non-decaying seed component makes the transform singular at ``delta = 0``.
    It raises unless ``drop_stationary`` is set, in which case it is projected out.
    """
    delta = np.asarray(delta_grid, dtype=float)
    seed = seed_regression(gen, a_label, state)
    ib = gen.basis.index(b_label)
    p0 = stationary_projector(gen)
    stat = p0 @ seed
    if not drop_stationary:
        ref = max(abs(seed[ib]), np.max(np.abs(seed)), 1e-300)
        if abs(stat[ib]) > stationary_tol * ref:
            raise DecayError(
                f"seed has a non-decaying component {abs(stat[ib]):.3g} in {format_label(b_label)}",
                abs(stat[ib]) / ref,
            )
    y0 = seed - stat
    if not np.any(y0):
        return Spectrum(delta, np.zeros_like(delta))
    n = gen.size
    # P0 shifts the kernel off zero; it does not touch the decaying subspace y0 lives in.
    base = p0 - gen.matrix
    mats = base[None, :, :] + 1j * delta[:, None, None] * np.eye(n)[None]
    cond = np.linalg.cond(mats)
    if np.any(~np.isfinite(cond)) or np.any(cond > max_condition):
        worst = float(np.nanmax(np.where(np.isfinite(cond), cond, np.inf)))
        raise SingularResolventError(f"resolvent ill-conditioned (cond ~ {worst:.3g})", worst)
    x = np.linalg.solve(mats, np.broadcast_to(y0, (delta.size, n))[..., None])[..., 0]
    return Spectrum(delta, prefactor * x[:, ib].real)


def default_tau_grid(gen: Generator, seed, b_label: Label, delta_max: float, min_tau_max=0.0,
                     points_per_radian=4.0, max_points=400_000) -> np.ndarray:
    """Uniform delay grid (odd length, for Simpson) covering the decay of ``y_B``."""
    tau_max, fastest = decay_horizon(gen, seed, b_label)
    tau_max = max(tau_max, min_tau_max)
    if tau_max <= 0:
        return np.linspace(0.0, 1.0, 3)
    omega_max = abs(delta_max) + fastest
    n = int(np.ceil(tau_max * omega_max * points_per_radian)) + 1
    n = min(max(n, 257), max_points)
    if n % 2 == 0:
        n += 1
    return np.linspace(0.0, tau_max, n)


def symmetric_grid(half_range: float, n_points: int) -> np.ndarray:
    if half_range <= 0 or n_points < 2:
        raise ValueError("grid needs a positive half-range and at least two points")
    return np.linspace(-half_range, half_range, n_points)
