"""Time-gridded solutions and the time-weighted norms measured on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, SpectralField, sobolev_norms


class Trajectory:
    """States u(t_j) on a shared grid, stored as an (nt, n) coefficient array."""

    def __init__(self, grid: Grid, times, coeffs, s: float, hermitian: bool = True):
        times = np.array(times, dtype=float)
        coeffs = np.array(coeffs, dtype=np.complex128)
        if times.ndim != 1 or len(times) == 0:
            raise ValueError("times must be a nonempty 1-D array")
        if coeffs.shape != (len(times), grid.n):
            raise ValueError(f"coeffs shape {coeffs.shape} does not match ({len(times)}, {grid.n})")
        times.flags.writeable = False
        coeffs.flags.writeable = False
        self.grid = grid
        self.times = times
        self.coeffs = coeffs
        self.s = float(s)
        self.hermitian = hermitian

    def __len__(self):
        return len(self.times)

    def state(self, j: int) -> SpectralField:
        if self.hermitian:
            return SpectralField.real(self.grid, self.coeffs[j])
        return SpectralField(self.grid, self.coeffs[j])

    @property
    def states(self) -> list[SpectralField]:
        return [self.state(j) for j in range(len(self))]

    @property
    def final(self) -> SpectralField:
        return self.state(len(self) - 1)

    def norms(self, s: float) -> np.ndarray:
        return sobolev_norms(self.coeffs, self.grid, s)

    def dx_norms(self) -> np.ndarray:
        """||d_x u(t_j)||_{L^2} per node."""
        return np.sqrt(2.0 * self.grid.L * np.sum((self.grid.k**2) * np.abs(self.coeffs) ** 2, axis=1))

    @classmethod
    def concatenate(cls, parts: list["Trajectory"]) -> "Trajectory":
        """Join windows end to start, dropping each duplicated junction node."""
        times = [parts[0].times]
        coeffs = [parts[0].coeffs]
        for p in parts[1:]:
            times.append(p.times[1:])
            coeffs.append(p.coeffs[1:])
        return cls(parts[0].grid, np.concatenate(times), np.concatenate(coeffs),
                   parts[0].s, all(p.hermitian for p in parts))


@dataclass(frozen=True)
class XNormReport:
    x_norm: float
    sup_hs: float
    sup_weighted: float
    hs: np.ndarray
    weighted: np.ndarray


def time_weight(times: np.ndarray, exponent: float) -> np.ndarray:
    """t^exponent, with the t = 0 value taken as its limit."""
    times = np.asarray(times, dtype=float)
    if exponent < 0 and np.any(times == 0):
        raise ValueError("negative weight exponent is singular at t = 0")
    with np.errstate(divide="ignore"):
        w = np.where(times > 0, np.abs(times) ** exponent, 0.0 if exponent > 0 else 1.0)
    return w


def x_norm(traj: Trajectory, s: float | None = None) -> XNormReport:
    """sup_j ( ||u(t_j)||_{H^s} + t_j^{(1-s)/2} ||d_x u(t_j)|| )."""
    s = traj.s if s is None else s
    hs = traj.norms(s)
    weighted = time_weight(traj.times - traj.times[0], (1.0 - s) / 2.0) * traj.dx_norms()
    return XNormReport(float(np.max(hs + weighted)), float(np.max(hs)), float(np.max(weighted)),
                       hs, weighted)


def x_distance(a: np.ndarray, b: np.ndarray, times: np.ndarray, grid: Grid, s: float) -> float:
    """X_T^s norm of the difference of two coefficient stacks."""
    return x_norm(Trajectory(grid, times, a - b, s, hermitian=False)).x_norm


def tilde_norm(traj: Trajectory, s: float, s_prime: float) -> float:
    """||u||_{X^{s'}} + sup_t t^{s/2} ||J^{s'-s} u(t)||_{L^2}."""
    if not s_prime > s:
        raise ValueError(f"need s' > s, got s={s}, s'={s_prime}")
    extra = time_weight(traj.times - traj.times[0], s / 2.0) * traj.norms(s_prime - s)
    return x_norm(traj, s_prime).x_norm + float(np.max(extra))
