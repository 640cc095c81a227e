"""Restricted roots, parabolic subalgebras and horospherical geometry of solvable models."""

from .liealg import MatrixLieAlgebra, build_from_catalog, catalog_names
from .parabolic import PhiSubset, build_parabolic, orthogonality_test
from .rootspace import classify_root_system, root_decompose
from .solvgeom import build_model, horospherical

__all__ = [
    "MatrixLieAlgebra",
    "PhiSubset",
    "build_from_catalog",
    "build_model",
    "build_parabolic",
    "catalog_names",
    "classify_root_system",
    "horospherical",
    "orthogonality_test",
    "root_decompose",
]
__version__ = "0.1.0"
