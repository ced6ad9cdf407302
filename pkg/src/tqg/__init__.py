"""Pseudo-spectral simulator and regularity diagnostics for the thermal quasi-geostrophic equations."""

from tqg.dynamics import TqgParams, TqgState
from tqg.spectral import Grid, ScalarField, SpectralField, VectorField

__all__ = ["Grid", "ScalarField", "SpectralField", "VectorField", "TqgParams", "TqgState"]
__version__ = "0.1.0"
