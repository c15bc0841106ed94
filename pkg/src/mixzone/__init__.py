"""Numerical mixing-zone subsolutions for two-phase porous media flow."""

from mixzone.curves import Curve, CurveSlice, Grid, default_grid
from mixzone.evolution import InterfaceJet, SpeedFamily, build_jet
from mixzone.quadrature import PVConfig, PVFunction, Weight, transform, transform_grid
from mixzone.subsolution import g_family, weak_residual

__all__ = [
    "Curve",
    "CurveSlice",
    "Grid",
    "default_grid",
    "InterfaceJet",
    "SpeedFamily",
    "build_jet",
    "PVConfig",
    "PVFunction",
    "Weight",
    "transform",
    "transform_grid",
    "g_family",
    "weak_residual",
]

__version__ = "0.1.0"
