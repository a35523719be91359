"""Inverse problem: reconstruct the division rate from a stationary profile."""

from divrate.inverse.base import (
    NonPositiveAlpha,
    ReconstructionDiagnostics,
    ReconstructionMethod,
    ReconstructionResult,
    Reconstructor,
    RegularizationError,
)
from divrate.inverse.exact import ExactReconstructor
from divrate.inverse.factory import create_reconstructor
from divrate.inverse.filtering import FilteringReconstructor, filter_regularize
from divrate.inverse.hybrid import DEFAULT_FILTER_WIDTH, HybridReconstructor, hybrid
from divrate.inverse.mollifier import Mollifier, make_mollifier
from divrate.inverse.operators import product_residual, rhs_L, solve_dilation
from divrate.inverse.quasi_reversibility import QuasiReversibilityReconstructor, quasi_reversibility


__all__ = [
    "DEFAULT_FILTER_WIDTH",
    "ExactReconstructor",
    "FilteringReconstructor",
    "HybridReconstructor",
    "Mollifier",
    "NonPositiveAlpha",
    "QuasiReversibilityReconstructor",
    "ReconstructionDiagnostics",
    "ReconstructionMethod",
    "ReconstructionResult",
    "Reconstructor",
    "RegularizationError",
    "create_reconstructor",
    "filter_regularize",
    "hybrid",
    "make_mollifier",
    "product_residual",
    "quasi_reversibility",
    "rhs_L",
    "solve_dilation",
]
