"""Symplectic Stiefel complexes, chaining homotopies and stability ranges."""
from .field import PrimeField
from .symplectic import REALS, SymplecticSpace, Subspace
from .complex import StiefelComplex, build_complex, reduced_betti, connectivity
from .chains import DescendingChain, enumerate_chains, expand_homotopy, expand_identity_residual
from .stability import GL, SLC, SP, StabilityParams, Verdict, classify
from .errors import ResourceError

__version__ = "0.1.0"

__all__ = [
    "PrimeField", "REALS", "SymplecticSpace", "Subspace", "StiefelComplex", "build_complex",
    "reduced_betti", "connectivity", "DescendingChain", "enumerate_chains", "expand_homotopy",
    "expand_identity_residual", "GL", "SLC", "SP", "StabilityParams", "Verdict", "classify",
    "ResourceError",
]
