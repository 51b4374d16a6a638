"""Semiclassical entanglement in bipartite systems.

Truncated-basis quantum dynamics of coherent product states, the short-time
entanglement expansion, a closed form for the two-mode BEC, and a Liouville
ensemble for the classical counterpart.
"""
__version__ = "0.1.0"

from .hilbert import (CompositeSpace, DensityMatrix, FockSpace, HermitianOperator, SpinSpace,
                      StateVector, embed, partial_trace, purity, rle)
from .states import PhasePoint, coherent, husimi_initial_density, product_state
from .models import BecParams, DickeParams, PolynomialHamiltonian, build_bec, build_dicke
from .dynamics import EntropySeries, Propagator, entropy_series, evolve

__all__ = [
    "CompositeSpace", "DensityMatrix", "FockSpace", "HermitianOperator", "SpinSpace",
    "StateVector", "embed", "partial_trace", "purity", "rle", "PhasePoint", "coherent",
    "husimi_initial_density", "product_state", "BecParams", "DickeParams",
    "PolynomialHamiltonian", "build_bec", "build_dicke", "EntropySeries", "Propagator",
    "entropy_series", "evolve",
]
