"""Pseudospectral laboratory for the nonlocal Kuramoto-Sivashinsky equation

    u_t - u_xx - mu (1 - d_x^2)^{-1/2} u - (1/2)(u_x)^2 = 0

on a periodic truncation of the real line.
"""

from .data import Box, BoxPairSpec, BoxProfile, DataCatalogEntry, make_data
from .solver import (BlowUp, NonContraction, SolverConfig, SolverError, etd_march, global_solve,
                     local_T_estimate, picard_solve, second_derivative_probe, solve)
from .spectral import Grid, SpectralField, derivative, nonlinearity, sample, sobolev_norm
from .symbol import SymbolParams, phi, phi_functions, semigroup_apply
from .trajectory import Trajectory, x_norm

__version__ = "0.1.0"

__all__ = [
    "Box", "BoxPairSpec", "BoxProfile", "DataCatalogEntry", "make_data",
    "BlowUp", "NonContraction", "SolverConfig", "SolverError", "etd_march", "global_solve",
    "local_T_estimate", "picard_solve", "second_derivative_probe", "solve",
    "Grid", "SpectralField", "derivative", "nonlinearity", "sample", "sobolev_norm",
    "SymbolParams", "phi", "phi_functions", "semigroup_apply",
    "Trajectory", "x_norm",
]
