"""Mild solutions of u_t = u_xx + mu (1 - d_x^2)^{-1/2} u + (1/2)(u_x)^2.

The Duhamel form

    u(t) = E_mu(t) phi + (1/2) int_0^t E_mu(t - tau) (u_x)^2(tau) dtau

is solved either by Picard iteration of the whole-interval map F_mu on a
uniform time grid, or by exponential time differencing.  Time integrals are
product-integrated per mode: the forcing is linear on each subinterval and
the exponential is integrated exactly through phi_1/phi_2 weights.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .spectral import Grid, SpectralField, gradient_product, half_grad_squared, sobolev_norm
from .symbol import SymbolParams, phi, phi_functions
from .trajectory import Trajectory, x_distance

log = logging.getLogger(__name__)

SCHEMES = ("picard", "etd1", "etdrk2")
BLOWUP_THRESHOLD = 1e12


class SolverError(RuntimeError):
    """Base class for numerical failures of a run."""

    window: tuple[float, float] | None = None


class NonContraction(SolverError):
    """Picard distances stopped shrinking: T is too large for the data."""


class BlowUp(SolverError):
    """A Fourier coefficient exceeded the blow-up threshold."""


@dataclass(frozen=True)
class SolverConfig:
    T: float
    nt: int = 256
    s: float = 0.75
    params: SymbolParams = SymbolParams()
    scheme: str = "picard"
    tol: float = 1e-10
    max_iter: int = 50
    nonlinear: bool = True  # test hook: False solves the linear problem

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.nt < 2:
            raise ValueError(f"nt must be at least 2, got {self.nt}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "picard" and self.T > 1:
            raise ValueError("Picard iteration needs T <= 1; use global_solve for longer horizons")

    @property
    def dt(self) -> float:
        return self.T / (self.nt - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.nt)


class DuhamelWeights:
    """Per-mode product-trapezoid weights for a uniform step h.

    Over one step, int_0^h e^{(h - r) lam} g(r) dr with g linear between
    g_0 and g_1 equals h[(phi1 - phi2) g_0 + phi2 g_1] at z = h lam.
    """

    def __init__(self, grid: Grid, params: SymbolParams, h: float):
        lam = phi(grid.k, params)
        z = h * lam
        p1, p2 = phi_functions(z)
        self.h = h
        self.lam = lam
        self.decay = np.exp(z)
        self.phi1 = p1
        self.phi2 = p2
        self.w_left = h * (p1 - p2)
        self.w_right = h * p2

    def accumulate(self, forcing: np.ndarray) -> np.ndarray:
        """int_0^{t_j} E(t_j - tau) g(tau) dtau for every node j."""
        out = np.empty_like(forcing)
        out[0] = 0.0
        for j in range(1, len(forcing)):
            out[j] = self.decay * out[j - 1] + self.w_left * forcing[j - 1] + self.w_right * forcing[j]
        return out


def duhamel_integral(forcing: Trajectory, t_index: int, params: SymbolParams) -> SpectralField:
    """int_0^{t_j} E_mu(t_j - tau) g(tau) dtau for a forcing stored on a uniform grid."""
    times = forcing.times
    if not 0 <= t_index < len(times):
        raise IndexError(f"t_index {t_index} outside 0..{len(times) - 1}")
    if t_index == 0:
        return SpectralField(forcing.grid, np.zeros(forcing.grid.n), forcing.hermitian)
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=0):
        raise ValueError("duhamel_integral needs a uniform time grid")
    w = DuhamelWeights(forcing.grid, params, h)
    acc = w.accumulate(forcing.coeffs[: t_index + 1])
    return SpectralField(forcing.grid, acc[t_index], forcing.hermitian)


def _linear_stack(phi0: np.ndarray, lam: np.ndarray, times: np.ndarray) -> np.ndarray:
    return np.exp(np.outer(times, lam)) * phi0


def _forcing(coeffs: np.ndarray, grid: Grid, nonlinear: bool) -> np.ndarray:
    if not nonlinear:
        return np.zeros_like(coeffs)
    return half_grad_squared(coeffs, grid)


@dataclass
class PicardResult:
    trajectory: Trajectory
    iterations: int
    distances: list[float]
    ratios: list[float]

    def __iter__(self):
        # allows ``traj, iterations, ratios = picard_solve(...)``
        return iter((self.trajectory, self.iterations, self.ratios))


def picard_map(u: np.ndarray, linear: np.ndarray, weights: DuhamelWeights, grid: Grid,
               nonlinear: bool = True) -> np.ndarray:
    """F_mu(u) on the time grid: linear part plus the Duhamel integral of (1/2)(u_x)^2."""
    if not nonlinear:
        return linear.copy()
    return linear + weights.accumulate(_forcing(u, grid, True))


def picard_solve(phi0: SpectralField, cfg: SolverConfig) -> PicardResult:
    """Iterate u <- F_mu(u) from u^(0) = E_mu(t) phi0 until the X_T^s step is below tol."""
    if cfg.scheme != "picard":
        raise ValueError(f"picard_solve needs scheme='picard', got {cfg.scheme!r}")
    if not phi0.hermitian:
        raise ValueError("the solver needs real (Hermitian) initial data")
    grid = phi0.grid
    times = cfg.times
    weights = DuhamelWeights(grid, cfg.params, cfg.dt)
    linear = _linear_stack(phi0.coeffs, weights.lam, times)
    u = linear
    distances: list[float] = []
    ratios: list[float] = []
    growing = 0
    for it in range(1, cfg.max_iter + 1):
        new = picard_map(u, linear, weights, grid, cfg.nonlinear)
        d = x_distance(new, u, times, grid, cfg.s)
        if not math.isfinite(d):
            raise NonContraction(f"Picard iterates diverged at iteration {it}")
        if distances:
            ratios.append(d / distances[-1] if distances[-1] > 0 else 0.0)
            growing = growing + 1 if d >= distances[-1] else 0
        distances.append(d)
        u = new
        log.debug("picard iteration %d: distance %.3e", it, d)
        if d < cfg.tol:
            traj = Trajectory(grid, times, u, cfg.s, hermitian=True)
            return PicardResult(traj, it, distances, ratios)
        if growing >= 3:
            raise NonContraction(f"distances grew for 3 consecutive iterations (last {d:.3e}); "
                                 f"T={cfg.T} is too large for this data")
    raise NonContraction(f"no convergence to tol={cfg.tol} in {cfg.max_iter} iterations "
                         f"(last distance {distances[-1]:.3e})")


def fixed_point_residual(traj: Trajectory, params: SymbolParams, nonlinear: bool = True) -> float:
    """||u - F_mu(u)||_{X_T^s} for a stored trajectory."""
    grid = traj.grid
    weights = DuhamelWeights(grid, params, traj.times[1] - traj.times[0])
    linear = _linear_stack(traj.coeffs[0], weights.lam, traj.times - traj.times[0])
    fu = picard_map(traj.coeffs, linear, weights, grid, nonlinear)
    return x_distance(traj.coeffs, fu, traj.times - traj.times[0], grid, traj.s)


def etd_march(phi0: SpectralField, cfg: SolverConfig) -> Trajectory:
    """Exponential Euler (etd1) or two-stage exponential Runge-Kutta (etdrk2)."""
    if cfg.scheme not in ("etd1", "etdrk2"):
        raise ValueError(f"etd_march needs scheme etd1 or etdrk2, got {cfg.scheme!r}")
    grid = phi0.grid
    w = DuhamelWeights(grid, cfg.params, cfg.dt)
    h = cfg.dt
    g1 = h * w.phi1
    g2 = h * w.phi2
    out = np.empty((cfg.nt, grid.n), dtype=complex)
    u = phi0.coeffs.copy()
    out[0] = u
    for j in range(1, cfg.nt):
        nu = _forcing(u, grid, cfg.nonlinear)
        a = w.decay * u + g1 * nu
        if cfg.scheme == "etdrk2":
            u = a + g2 * (_forcing(a, grid, cfg.nonlinear) - nu)
        else:
            u = a
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_THRESHOLD:
            raise BlowUp(f"mode magnitude exceeded {BLOWUP_THRESHOLD:g} at t={j * h:.6g}")
        out[j] = u
    return Trajectory(grid, cfg.times, out, cfg.s, hermitian=True)


def solve(phi0: SpectralField, cfg: SolverConfig) -> Trajectory:
    if cfg.scheme == "picard":
        return picard_solve(phi0, cfg).trajectory
    return etd_march(phi0, cfg)


def delta(s: float) -> float:
    """Time exponent s/2 + 1/4 of the bilinear Duhamel estimate."""
    return s / 2.0 + 0.25


def local_T_estimate(phi_norm: float, s: float, params: SymbolParams | None = None,
                     C: float = 1.0) -> float:
    """0.9 * min{(4 C^2 ||phi||_{H^s})^{-1/delta(s)}, 1}."""
    if phi_norm < 0:
        raise ValueError("phi_norm must be nonnegative")
    if not 0.5 < s < 1:
        raise ValueError(f"local_T_estimate needs 1/2 < s < 1, got {s}")
    if not C > 0:
        raise ValueError("C must be positive")
    if phi_norm == 0:
        return 0.9
    uncapped = (4.0 * C * C * phi_norm) ** (-1.0 / delta(s))
    return 0.9 * min(uncapped, 1.0)


@dataclass
class GlobalRun:
    trajectory: Trajectory
    windows: list[tuple[float, float]]
    dx_sq: np.ndarray
    gronwall_envelope: np.ndarray

    @property
    def n_windows(self) -> int:
        return len(self.windows)


def global_solve(phi0: SpectralField, s: float, params: SymbolParams, T_final: float,
                 cfg_template: SolverConfig, C: float = 1.0, max_windows: int = 100000) -> GlobalRun:
    """Continue local solutions over [0, T_final] on windows from local_T_estimate.

    Each window restarts from the last state with length set by that state's
    H^s norm.  With a picard template every window is a Picard solve; an
    etd template marches each window instead.  The a priori bound
    ||u_x(t)||^2 <= e^{2 mu t} ||phi'||^2 is recorded alongside.
    """
    if not T_final > 0:
        raise ValueError("T_final must be positive")
    grid = phi0.grid
    parts: list[Trajectory] = []
    windows: list[tuple[float, float]] = []
    t0 = 0.0
    state = phi0
    while t0 < T_final * (1 - 1e-12):
        if len(windows) >= max_windows:
            raise SolverError(f"exceeded {max_windows} windows before T_final={T_final}")
        length = local_T_estimate(sobolev_norm(state, s), s, params, C)
        length = min(length, T_final - t0)
        cfg = replace(cfg_template, T=length, s=s, params=params)
        try:
            local = solve(state, cfg)
        except SolverError as exc:
            exc.window = (t0, t0 + length)
            raise
        shifted = Trajectory(grid, local.times + t0, local.coeffs, s, hermitian=True)
        parts.append(shifted)
        windows.append((t0, t0 + length))
        t0 += length
        state = local.final
    traj = Trajectory.concatenate(parts)
    dx_sq = traj.dx_norms() ** 2
    envelope = np.exp(2 * params.mu * traj.times) * dx_sq[0]
    return GlobalRun(traj, windows, dx_sq, envelope)


def second_derivative_probe(phi0: SpectralField, psi0: SpectralField, s: float, params: SymbolParams,
                            t: float, eps: float, nt: int = 256, tol: float | None = None) -> SpectralField:
    """Polarized second difference of the data-to-solution map at 0.

    Returns [S(e(p+q)) + S(-e(p+q)) - S(e(p-q)) - S(-e(p-q))](t) / (4 e^2),
    which tends to 2 int_0^t E(t - tau) b(E p, E q) dtau with b(u, v) = u_x v_x / 2.
    """
    if not (phi0.hermitian and psi0.hermitian):
        raise ValueError("probe data must be real (Hermitian)")
    if tol is None:
        tol = 1e-4 * eps * eps
    cfg = SolverConfig(T=t, nt=nt, s=s, params=params, scheme="picard", tol=tol)
    plus = phi0 + psi0
    minus = phi0 - psi0
    total = np.zeros(phi0.grid.n, dtype=complex)
    for sign, data in ((1, plus), (1, -1 * plus), (-1, minus), (-1, -1 * minus)):
        total += sign * picard_solve(eps * data, cfg).trajectory.coeffs[-1]
    return SpectralField.real(phi0.grid, total / (4 * eps * eps))


def bilinear_duhamel_spectral(phi0: SpectralField, psi0: SpectralField, params: SymbolParams,
                              t: float, nt: int = 256) -> SpectralField:
    """int_0^t E(t - tau) b(E phi0, E psi0) dtau on the grid (no iteration)."""
    grid = phi0.grid
    times = np.linspace(0.0, t, nt)
    w = DuhamelWeights(grid, params, times[1])
    u = _linear_stack(phi0.coeffs, w.lam, times)
    v = _linear_stack(psi0.coeffs, w.lam, times)
    acc = w.accumulate(gradient_product(u, v, grid))
    return SpectralField(grid, acc[-1], hermitian=phi0.hermitian and psi0.hermitian)
