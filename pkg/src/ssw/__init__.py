"""Symbolic verification of shifted-symplectic cdga constructions."""

from .algebra import (
    AlgElement,
    CdgaMorphism,
    CheckRecord,
    Presentation,
    apply_derivation,
    check_d_squared,
    normalize,
    partial_derivative,
)
from .fields import QQ, QQI, CoefficientField, GaussRational

__all__ = [
    "AlgElement",
    "CdgaMorphism",
    "CheckRecord",
    "CoefficientField",
    "GaussRational",
    "Presentation",
    "QQ",
    "QQI",
    "apply_derivation",
    "check_d_squared",
    "normalize",
    "partial_derivative",
]
