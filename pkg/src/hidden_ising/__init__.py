"""Exact energy landscape and Metropolis dynamics of an Ising model with hidden preferences on the torus."""

__version__ = "0.1.0"

from .config import SpinConfiguration, hamiltonian_contour, hamiltonian_direct
from .lattice import InvalidSpec, ModelSpec, Regime, RegionLabel, classify_regime
from .paths import PathRecord, build_reference_path, gamma_star, gate_family, printed_forms

__all__ = [
    "InvalidSpec",
    "ModelSpec",
    "PathRecord",
    "Regime",
    "RegionLabel",
    "SpinConfiguration",
    "build_reference_path",
    "classify_regime",
    "gamma_star",
    "gate_family",
    "hamiltonian_contour",
    "hamiltonian_direct",
    "printed_forms",
]
