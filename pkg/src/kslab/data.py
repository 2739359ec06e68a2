"""Initial-data catalog: smooth bumps, rough random H^s data, and box spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .spectral import Grid, SpectralField, sample, sobolev_norm

KINDS = ("zero", "gaussian", "sech", "random_sobolev", "box_pair")
AMPLITUDE_RULES = ("paper", "normalized")


@dataclass(frozen=True)
class Box:
    """Constant spectral amplitude ``amp`` on the frequency interval [lo, hi]."""

    lo: float
    hi: float
    amp: complex = 1.0

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class BoxProfile:
    """A Fourier-side profile made of constant boxes, hat{f}(xi) = sum amp_i chi_i(xi)."""

    boxes: tuple[Box, ...]

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        for b in self.boxes:
            out += np.where((xi >= b.lo) & (xi <= b.hi), b.amp, 0.0)
        return out

    def scaled(self, c: complex) -> "BoxProfile":
        return BoxProfile(tuple(Box(b.lo, b.hi, c * b.amp) for b in self.boxes))

    def symmetrized(self) -> "BoxProfile":
        """Add the mirrored conjugate boxes so the profile belongs to a real function."""
        mirrored = tuple(Box(-b.hi, -b.lo, np.conj(b.amp)) for b in self.boxes)
        return BoxProfile(self.boxes + mirrored)


@dataclass(frozen=True)
class BoxPairSpec:
    """High-frequency box pair I1 = [-N, -N + r], I2 = [N + r, N + 2r]."""

    N: float
    r: float = 1.0
    s: float = 0.25
    amplitude_rule: str = "paper"

    def __post_init__(self):
        if self.N < 8:
            raise ValueError(f"N must be at least 8, got {self.N}")
        if not self.r > 0:
            raise ValueError("r must be positive")
        if self.amplitude_rule not in AMPLITUDE_RULES:
            raise ValueError(f"amplitude_rule must be one of {AMPLITUDE_RULES}")
        if self.N - self.r <= 3 * self.r:
            raise ValueError("boxes must stay clear of [-3r, 3r]; increase N")

    @property
    def amplitude(self) -> float:
        if self.amplitude_rule == "paper":
            return self.r**-0.5 * self.N ** (-(self.s - 0.5))
        return self.r**-0.5 * self.N ** (-self.s)

    @property
    def I1(self) -> tuple[float, float]:
        return (-self.N, -self.N + self.r)

    @property
    def I2(self) -> tuple[float, float]:
        return (self.N + self.r, self.N + 2 * self.r)

    def phi_hat(self) -> BoxProfile:
        return BoxProfile((Box(*self.I1, self.amplitude),))

    def psi_hat(self) -> BoxProfile:
        return BoxProfile((Box(*self.I2, self.amplitude),))


def bracket_power_integral(a: float, b: float, s: float) -> float:
    """Closed form of int_a^b (1 + xi^2)^s dxi via 2F1."""

    def antiderivative(x):
        return x * special.hyp2f1(-s, 0.5, 1.5, -x * x)

    return float(antiderivative(b) - antiderivative(a))


def box_hs_norm(box: Box, s: float) -> float:
    """||(chi_box amp)^vee||_{H^s} = |amp| (int_box <xi>^{2s} dxi)^{1/2}."""
    return abs(box.amp) * bracket_power_integral(box.lo, box.hi, s) ** 0.5


@dataclass(frozen=True)
class DataCatalogEntry:
    kind: str = "gaussian"
    amplitude: float = 0.5
    width: float = 1.0
    center: float | None = None  # defaults to the domain midpoint L
    s: float = 0.75
    seed: int = 0
    eps: float = 0.01
    box: BoxPairSpec | None = None
    which: str = "phi"  # box_pair component: 'phi' (I1) or 'psi' (I2)
    symmetric: bool = False  # box_pair: add the mirror boxes to get real data

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown data kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "box_pair" and self.box is None:
            raise ValueError("box_pair data needs a BoxPairSpec")
        if self.which not in ("phi", "psi"):
            raise ValueError("which must be 'phi' or 'psi'")


def gaussian_l2_norm(amplitude: float, width: float) -> float:
    """L^2(R) norm of A exp(-((x - x0)/w)^2)."""
    return abs(amplitude) * (width * np.sqrt(np.pi / 2)) ** 0.5


def box_weights(grid: Grid, lo: float, hi: float) -> np.ndarray:
    """Fraction of each lattice cell [k - h/2, k + h/2] covered by [lo, hi]."""
    h = np.pi / grid.L
    k = grid.k
    overlap = np.minimum(k + h / 2, hi) - np.maximum(k - h / 2, lo)
    return np.clip(overlap / h, 0.0, 1.0)


def profile_on_grid(profile: BoxProfile, grid: Grid, hermitian: bool = False) -> SpectralField:
    """Fourier-series coefficients c_k = hat{f}(k) / (2L), box edges cell-averaged."""
    band = np.max(np.abs(grid.k[grid.dealias_mask]))
    c = np.zeros(grid.n, dtype=complex)
    for b in profile.boxes:
        if max(abs(b.lo), abs(b.hi)) > band:
            raise ValueError(f"box [{b.lo}, {b.hi}] extends beyond the dealiased band |k| <= {band:.4g}")
        c += b.amp * box_weights(grid, b.lo, b.hi)
    c /= 2 * grid.L
    return SpectralField.real(grid, c) if hermitian else SpectralField(grid, c)


def random_sobolev_coefficients(grid: Grid, s: float, seed: int, eps: float = 0.01) -> np.ndarray:
    """<k>^{-s-1/2-eps} e^{i theta_k} with seeded phases, Hermitian, on the dealiased band."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2 * np.pi, grid.n)
    c = grid.bracket ** (-s - 0.5 - eps) * np.exp(1j * theta)
    c = np.where(grid.dealias_mask, c, 0.0)
    c[grid.nyquist] = 0.0
    # impose c_{-k} = conj(c_k) from the m > 0 half
    m = grid.modes
    neg = m < 0
    c[neg] = np.conj(c[grid.mirror[neg]])
    c[0] = c[0].real
    return c


def make_data(entry: DataCatalogEntry, grid: Grid) -> SpectralField:
    """Deterministic initial datum for a catalog entry."""
    center = grid.L if entry.center is None else entry.center
    if entry.kind == "zero":
        return SpectralField.zeros(grid)
    if entry.kind == "gaussian":
        return sample(lambda x: entry.amplitude * np.exp(-(((x - center) / entry.width) ** 2)), grid)
    if entry.kind == "sech":
        return sample(lambda x: entry.amplitude / np.cosh((x - center) / entry.width), grid)
    if entry.kind == "random_sobolev":
        c = random_sobolev_coefficients(grid, entry.s, entry.seed, entry.eps)
        f = SpectralField(grid, c, hermitian=True)
        # scaled so that ||phi||_{H^s} equals the requested amplitude
        return f * (entry.amplitude / sobolev_norm(f, entry.s))
    spec = entry.box
    profile = spec.phi_hat() if entry.which == "phi" else spec.psi_hat()
    if entry.symmetric:
        profile = profile.symmetrized()
    return profile_on_grid(profile, grid, hermitian=entry.symmetric)
