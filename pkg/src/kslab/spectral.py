"""Periodic Fourier representation of fields on a truncated real line.

Fields live on the torus [0, 2L) sampled at n points.  A field is stored
through its Fourier-series coefficients

    f(x) = sum_m c_m exp(i k_m x),    k_m = (pi / L) m,   m = -n/2 .. n/2-1,

kept in numpy FFT ordering (m = 0, 1, ..., n/2-1, -n/2, ..., -1), so that
``c = fft(f(x_j)) / n``.  Sobolev norms use the discrete convention

    ||f||_{H^s}^2 = 2L * sum_m <k_m>^{2s} |c_m|^2,    <k> = (1 + k^2)^{1/2},

which reduces to the L^2([0, 2L)) norm for s = 0 by Parseval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid of ``n`` points on ``[0, 2L)``."""

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"half-length L must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.n) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers m in FFT order."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(np.int64)
        m.flags.writeable = False
        return m

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumbers k_m = (pi/L) m in FFT order."""
        k = self.modes * (np.pi / self.L)
        k.flags.writeable = False
        return k

    @cached_property
    def bracket(self) -> np.ndarray:
        """Japanese bracket <k> = (1 + k^2)^{1/2}."""
        b = np.sqrt(1.0 + self.k**2)
        b.flags.writeable = False
        return b

    @property
    def nyquist(self) -> int:
        """Index of the unpaired mode m = -n/2."""
        return self.n // 2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True for the modes kept by the 2/3 rule.

        Kept modes satisfy 3|m| < n.  When 3 divides n the boundary mode |m| = n/3
        is dropped too, since 2(n/3) aliases onto -n/3 and would break exactness.
        """
        mask = 3 * np.abs(self.modes) < self.n
        mask.flags.writeable = False
        return mask

    @cached_property
    def mirror(self) -> np.ndarray:
        """Index map m -> -m (the Nyquist mode maps to itself)."""
        idx = (-np.arange(self.n)) % self.n
        idx.flags.writeable = False
        return idx


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a field on ``grid``.

    ``hermitian`` marks real-valued fields; for those the coefficients must
    satisfy c_{-m} = conj(c_m) and a real Nyquist coefficient.
    """

    grid: Grid
    coeffs: np.ndarray
    hermitian: bool = field(default=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} coefficients, got shape {c.shape}")
        if self.hermitian:
            scale = max(np.max(np.abs(c)), np.finfo(float).tiny)
            defect = np.max(np.abs(c[self.grid.mirror] - np.conj(c)))
            if defect > HERMITIAN_RTOL * scale:
                raise ValueError(f"coefficients are not Hermitian (defect {defect:.3e})")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def real(cls, grid: Grid, coeffs: np.ndarray) -> "SpectralField":
        """Real field from coefficients that are Hermitian up to rounding (projects them)."""
        c = np.asarray(coeffs, dtype=np.complex128)
        return cls(grid, 0.5 * (c + np.conj(c[grid.mirror])), hermitian=True)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.n, dtype=complex), hermitian=True)

    def values(self) -> np.ndarray:
        """Point values on ``grid.x`` (real array for Hermitian fields)."""
        v = np.fft.ifft(self.coeffs) * self.grid.n
        return v.real if self.hermitian else v

    def with_coeffs(self, coeffs: np.ndarray, hermitian: bool | None = None) -> "SpectralField":
        hermitian = self.hermitian if hermitian is None else hermitian
        if hermitian:
            return SpectralField.real(self.grid, coeffs)
        return SpectralField(self.grid, coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_grid(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs, self.hermitian and other.hermitian)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_grid(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs, self.hermitian and other.hermitian)

    def __mul__(self, scalar: complex) -> "SpectralField":
        real = bool(np.isreal(scalar))
        return self.with_coeffs(self.coeffs * scalar, self.hermitian and real)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs, self.hermitian)


def _check_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def forward(values: np.ndarray) -> np.ndarray:
    """Point values -> Fourier-series coefficients along the last axis."""
    values = np.asarray(values)
    return np.fft.fft(values, axis=-1) / values.shape[-1]


def inverse(coeffs: np.ndarray) -> np.ndarray:
    """Fourier-series coefficients -> point values along the last axis."""
    coeffs = np.asarray(coeffs)
    return np.fft.ifft(coeffs, axis=-1) * coeffs.shape[-1]


def sample(profile: Callable[[np.ndarray], np.ndarray], grid: Grid, real: bool = True) -> SpectralField:
    """Sample ``profile`` on the grid and transform to coefficients."""
    v = np.asarray(profile(grid.x))
    if v.shape == ():
        v = np.full(grid.n, v)
    if real:
        v = np.real(v).astype(float)
    c = forward(v)
    # fft of real input is Hermitian up to rounding; SpectralField.real makes it exact
    return SpectralField.real(grid, c) if real else SpectralField(grid, c)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Discrete H^s norm ``(2L sum <k>^{2s} |c_k|^2)^{1/2}``."""
    return float(np.sqrt(2.0 * f.grid.L * np.sum(f.grid.bracket ** (2 * s) * np.abs(f.coeffs) ** 2)))


def sobolev_norms(coeffs: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    """Row-wise H^s norms of a stack of coefficient vectors."""
    w = grid.bracket ** (2 * s)
    return np.sqrt(2.0 * grid.L * np.sum(w * np.abs(coeffs) ** 2, axis=-1))


def inner(f: SpectralField, g: SpectralField) -> float:
    """Real L^2 inner product <f, g> on [0, 2L)."""
    _check_grid(f, g)
    return float(2.0 * f.grid.L * np.real(np.vdot(f.coeffs, g.coeffs)))


def derivative_multiplier(grid: Grid, order: int) -> np.ndarray:
    if int(order) != order or order < 1:
        raise ValueError(f"derivative order must be a positive integer, got {order}")
    mult = (1j * grid.k) ** order
    if order % 2:
        mult[grid.nyquist] = 0.0
    return mult


def derivative(f: SpectralField, order: int = 1) -> SpectralField:
    """Spectral derivative; odd orders zero the Nyquist mode."""
    return f.with_coeffs(derivative_multiplier(f.grid, order) * f.coeffs)


def bessel_potential(f: SpectralField, s: float) -> SpectralField:
    """J^s f, the Fourier multiplier <k>^s."""
    return f.with_coeffs(f.grid.bracket**s * f.coeffs)


def dealias(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return np.where(grid.dealias_mask, coeffs, 0.0)


def half_grad_squared(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Dealiased coefficients of (1/2)(u_x)^2 for real fields, any leading shape."""
    ux = inverse(derivative_multiplier(grid, 1) * coeffs).real
    return dealias(forward(0.5 * ux * ux), grid)


def gradient_product(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    """Dealiased coefficients of (1/2) a_x b_x (complex fields allowed)."""
    d = derivative_multiplier(grid, 1)
    return dealias(forward(0.5 * inverse(d * a) * inverse(d * b)), grid)


def nonlinearity(u: SpectralField) -> SpectralField:
    """Dealiased (1/2)(u_x)^2 of a real field."""
    if not u.hermitian:
        raise ValueError("nonlinearity requires a real (Hermitian) field")
    return SpectralField.real(u.grid, half_grad_squared(u.coeffs, u.grid))
