"""The linear symbol Phi(xi) = -xi^2 + mu <xi>^{-1}, its semigroup, and
numerical certificates for the multiplier estimates built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .spectral import SpectralField, sobolev_norm


@dataclass(frozen=True)
class SymbolParams:
    mu: float = 1.0

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be a finite nonnegative number, got {self.mu}")


def phi(xi, params: SymbolParams):
    """Phi(xi) = -xi^2 + mu (1 + xi^2)^{-1/2}; accepts scalars or arrays."""
    xi = np.asarray(xi, dtype=float)
    out = -xi**2 + params.mu / np.sqrt(1.0 + xi**2)
    return float(out) if out.ndim == 0 else out


def semigroup_multiplier(t: float, f: SpectralField, params: SymbolParams) -> np.ndarray:
    return np.exp(t * phi(f.grid.k, params))


def semigroup_apply(t: float, f: SpectralField, params: SymbolParams) -> SpectralField:
    """E_mu(t) f: multiply each mode by exp(t Phi(k))."""
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return f.with_coeffs(semigroup_multiplier(t, f, params) * f.coeffs)


# |z| below which phi_1, phi_2 come from their Taylor series
SERIES_RADIUS = 1e-4
# expm1(z) - z loses ~4 digits for small |z|; phi_2 uses a long series up to here
_PHI2_MID_RADIUS = 1.0
_PHI2_MID_TERMS = 22


def phi_functions(z):
    """Return (phi1, phi2) with phi1 = (e^z - 1)/z, phi2 = (e^z - z - 1)/z^2.

    Scalars in, floats out; arrays in, arrays out.
    """
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    p1 = np.empty_like(z_arr)
    p2 = np.empty_like(z_arr)
    az = np.abs(z_arr)

    small = az < SERIES_RADIUS
    zs = z_arr[small]
    p1[small] = 1 + zs * (1 / 2 + zs * (1 / 6 + zs * (1 / 24 + zs * (1 / 120 + zs / 720))))
    p2[small] = 1 / 2 + zs * (1 / 6 + zs * (1 / 24 + zs * (1 / 120 + zs * (1 / 720 + zs / 5040))))

    big = ~small
    zb = z_arr[big]
    em1 = np.expm1(zb)
    p1[big] = em1 / zb
    p2[big] = (em1 - zb) / zb**2

    mid = big & (az < _PHI2_MID_RADIUS)
    if np.any(mid):
        zm = z_arr[mid]
        # phi2(z) = sum_j z^j / (j + 2)!
        acc = np.zeros_like(zm)
        for j in range(_PHI2_MID_TERMS, -1, -1):
            acc = acc * zm + 1.0 / math.factorial(j + 2)
        p2[mid] = acc

    if scalar:
        return float(p1[0]), float(p2[0])
    return p1, p2


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of a measured-versus-bound certificate."""

    measured: float
    bound: float
    passed: bool
    argmax: float = float("nan")

    @property
    def ratio(self) -> float:
        return self.measured / self.bound if self.bound else float("inf")


def _refined_max(func, grid: np.ndarray) -> tuple[float, float]:
    """Max of ``func`` over ``grid``, polished by a bounded scalar search."""
    vals = func(grid)
    i = int(np.argmax(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -func(np.array([x]))[0], bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-14 * max(1.0, hi)})
        if -res.fun > best_v:
            best_x, best_v = float(res.x), float(-res.fun)
    return best_v, best_x


def _xi_grid(stationary: float, xi_max: float, n_lin: int = 20001, n_geo: int = 2001) -> np.ndarray:
    lin = np.linspace(0.0, xi_max, n_lin)
    geo = np.geomspace(1e-8, xi_max, n_geo)
    pts = [lin, geo, [stationary]] if stationary > 0 else [lin, geo]
    return np.unique(np.concatenate(pts))


def lemma21_sup_check(lam: float, t: float, T: float, params: SymbolParams) -> BoundCheck:
    """Measure sup_xi xi^{2 lam} e^{t Phi(xi)} against e^{mu T} (lam/e)^lam t^{-lam}."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if not 0 < t <= T:
        raise ValueError(f"need 0 < t <= T, got t={t}, T={T}")
    stationary = math.sqrt(lam / t)
    xi_max = 4.0 * stationary + 10.0
    grid = _xi_grid(stationary, xi_max)

    def func(xi):
        # xi^{2 lam} with 0^0 = 1
        power = np.where(xi == 0, 1.0 if lam == 0 else 0.0, np.abs(xi) ** (2 * lam))
        return power * np.exp(t * phi(xi, params))

    measured, where = _refined_max(func, grid)
    shape = 1.0 if lam == 0 else (lam / math.e) ** lam
    bound = math.exp(params.mu * T) * shape * t ** (-lam)
    return BoundCheck(measured, bound, measured <= bound * (1 + 1e-9), where)


def gaussian_moment(nu: float) -> float:
    """c_nu with || |xi|^nu e^{-t xi^2} ||_{L^2} = c_nu t^{-nu/2 - 1/4}."""
    if not nu > -0.5:
        raise ValueError(f"nu must exceed -1/2, got {nu}")
    return math.sqrt(2.0 ** (-(nu + 0.5)) * special.gamma(nu + 0.5))


def gaussian_moment_quadrature(nu: float, t: float) -> float:
    """|| |xi|^nu e^{-t xi^2} ||_{L^2_xi} by adaptive quadrature (independent of the Gamma form)."""
    if not nu > -0.5:
        raise ValueError(f"nu must exceed -1/2, got {nu}")
    if t <= 0:
        raise ValueError("t must be positive")
    scale = 1.0 / math.sqrt(t)
    half, _ = integrate.quad(lambda x: x ** (2 * nu) * math.exp(-2 * t * x * x), 0.0, scale,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda x: x ** (2 * nu) * math.exp(-2 * t * x * x), scale, np.inf,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    return math.sqrt(2.0 * (half + tail))


def gaussian_moment_check(nu: float, ts=(0.1, 1.0, 10.0)) -> list[tuple[float, float]]:
    """(t, quadrature / (c_nu t^{-nu/2-1/4})) for each t."""
    c = gaussian_moment(nu)
    return [(t, gaussian_moment_quadrature(nu, t) / (c * t ** (-nu / 2 - 0.25))) for t in ts]


def _bisect(func, lo: float, hi: float, xtol: float = 1e-10) -> float:
    while func(hi) < 0:
        hi *= 2.0
    return optimize.bisect(func, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


def find_M(params: SymbolParams) -> float:
    """Smallest M with Phi(xi) < -1 and |Phi(xi)| >= xi^2/2 for all |xi| >= M."""
    mu = params.mu
    # Phi strictly decreasing in |xi|: root of Phi(xi) = -1
    m_first = _bisect(lambda x: -phi(x, params) - 1.0, 0.0, 2.0)
    # beyond m_first Phi < 0, so |Phi| >= xi^2/2 iff xi^2 <xi> >= 2 mu
    m_second = 0.0 if mu == 0 else _bisect(lambda x: x * x * math.sqrt(1 + x * x) - 2 * mu, 0.0, 2.0)
    # nudge above the bracketed root so both strict inequalities hold at M itself
    return max(m_first, m_second) + 1e-10


def lemma_m1_holds(xi, params: SymbolParams) -> np.ndarray:
    """Phi(xi) < -1 and |Phi(xi)| >= xi^2/2, elementwise."""
    p = phi(xi, params)
    xi = np.asarray(xi, dtype=float)
    return (p < -1.0) & (np.abs(p) >= xi**2 / 2)


def calculus_bound_check(alpha: float, beta: float, n_points: int = 200001) -> BoundCheck:
    """max_{t >= 0} t^alpha e^{t beta} versus (alpha/|beta|)^alpha e^{-alpha}."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not beta < 0:
        raise ValueError(f"beta must be negative, got {beta}")
    peak = alpha / abs(beta)
    grid = np.unique(np.concatenate([np.linspace(0.0, 10.0 * peak, n_points), [peak]]))

    def func(t):
        return np.where(t == 0, 0.0, t**alpha * np.exp(t * beta))

    measured, where = _refined_max(func, grid)
    bound = peak**alpha * math.exp(-alpha)
    return BoundCheck(measured, bound, measured <= bound * (1 + 1e-9), where)


def linear_xnorm_measure(phi0: SpectralField, s: float, T: float, params: SymbolParams,
                         nt: int = 256) -> float:
    """||E_mu(.) phi0||_{X_T^s} / ||phi0||_{H^s} on the uniform time grid."""
    from .trajectory import Trajectory, x_norm

    if not 0 < T <= 1:
        raise ValueError(f"need 0 < T <= 1, got {T}")
    if s >= 1:
        raise ValueError(f"need s < 1, got {s}")
    denom = sobolev_norm(phi0, s)
    if denom == 0:
        raise ValueError("initial field is zero")
    times = np.linspace(0.0, T, nt)
    lam = phi(phi0.grid.k, params)
    states = np.exp(np.outer(times, lam)) * phi0.coeffs
    traj = Trajectory(phi0.grid, times, states, s, hermitian=phi0.hermitian)
    return x_norm(traj).x_norm / denom
