"""
jetlie - exact Lie point symmetries of completely integrable systems.

Prolongation of vector fields to jet space, determining equations, the polynomial
symmetry algebra, closed-form prolongation checks, finite transformations and the
submanifold-of-solutions calculus, all over exact rationals.
"""

from .config import Config, setup_logging
from .errors import (
    DomainError,
    ExpressionSizeError,
    JetlieError,
    NotASymmetryError,
    ParseError,
    ResourceError,
    SpecificationError,
    UnsupportedShapeError,
)
from .jet import JetCoord, JetSpace, canonical_jet, jet_dim
from .prolong import VectorField, prolong_coeff, prolong_field
from .system import SystemSpec, homogeneous_system

__version__ = "0.1.0"

__all__ = [
    "Config",
    "DomainError",
    "ExpressionSizeError",
    "JetCoord",
    "JetSpace",
    "JetlieError",
    "NotASymmetryError",
    "ParseError",
    "ResourceError",
    "SpecificationError",
    "SystemSpec",
    "UnsupportedShapeError",
    "VectorField",
    "canonical_jet",
    "homogeneous_system",
    "jet_dim",
    "prolong_coeff",
    "prolong_field",
    "setup_logging",
]
