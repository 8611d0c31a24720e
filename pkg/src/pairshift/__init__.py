"""Coherent shift of bound pairs by a scattered particle on a 1D lattice."""

from .model import (
    Boundary,
    ModelParams,
    PairKind,
    Sector,
    SectorBasis,
    SparseHermitianOperator,
    Statistics,
    build_k_block,
    build_real_space_hamiltonian,
    enumerate_basis,
)
from .transport import analytic_T12, negf_transmission, planewave_scattering, resonance_V

__version__ = "0.1.0"

__all__ = [
    "Boundary", "ModelParams", "PairKind", "Sector", "SectorBasis", "SparseHermitianOperator", "Statistics",
    "build_k_block", "build_real_space_hamiltonian", "enumerate_basis",
    "analytic_T12", "negf_transmission", "planewave_scattering", "resonance_V",
]
