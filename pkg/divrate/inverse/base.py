#!/usr/bin/env python3
"""Abstract base class for division-rate reconstruction methods.

Every method turns a (possibly noisy) stationary profile N_ε into a division
rate B through the dilation equation, differing in how the ill-posed
derivative of the data is regularized.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional

import numpy as np

from divrate.inverse.operators import clamp_rate, floor_mask, product_residual, rate_from_product
from divrate.model.errors import DivrateError
from divrate.model.types import DivisionRate, GrowthLaw, SizeDensity


class ReconstructionMethod(Enum):
    """Available inversion methods."""

    EXACT = "exact"
    QUASI_REVERSIBILITY = "qr"
    FILTERING = "filter"
    HYBRID = "hybrid"


class RegularizationError(DivrateError):
    """Base exception for regularized reconstruction errors."""

    exit_code = 9


class NonPositiveAlpha(RegularizationError):
    """Regularization parameter is not strictly positive."""


def check_alpha(alpha: float, name: str = "alpha") -> float:
    """Return alpha as a float, raising NonPositiveAlpha unless it is positive and finite."""
    if not (np.isfinite(alpha) and alpha > 0):
        raise NonPositiveAlpha(f"{name} must be positive, got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class ReconstructionDiagnostics:
    """Bookkeeping of the post-processing applied to a reconstruction.

    Attributes:
        clamp_count: Nodes where a negative rate was clamped to zero
        clamped_mass: ∫(B·N)₋ removed by clamping
        floor_count: Nodes where N fell below the division floor (B set to 0)
        filter_width: Mollifier width, for filtering methods
        oversmoothed: Filter width reaches the support width of the data
    """

    clamp_count: int = 0
    clamped_mass: float = 0.0
    floor_count: int = 0
    filter_width: Optional[float] = None
    oversmoothed: bool = False

    def as_dict(self) -> Dict[str, float]:
        values = {
            "clamp_count": float(self.clamp_count),
            "clamped_mass": self.clamped_mass,
            "floor_count": float(self.floor_count),
            "oversmoothed": float(self.oversmoothed),
        }
        if self.filter_width is not None:
            values["filter_width"] = self.filter_width
        return values


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Reconstructed division rate with its provenance.

    Attributes:
        rate: Clamped division rate B ≥ 0
        lambda_used: Malthus parameter used in the forcing
        alpha: Regularization parameter (0 for the exact solve, the
            quasi-reversibility α for the hybrid)
        method: Method that produced the result
        residual: Dilation residual against the unfiltered data
        diagnostics: Clamp and floor bookkeeping
        product: H = B·N before flooring and clamping
        profile: Profile N the dilation equation was solved against
    """

    rate: DivisionRate
    lambda_used: float
    alpha: float
    method: ReconstructionMethod
    residual: float
    diagnostics: ReconstructionDiagnostics
    product: np.ndarray
    profile: SizeDensity

    def __post_init__(self) -> None:
        if not self.residual >= 0:
            raise ValueError(f"Residual must be nonnegative, got {self.residual}")


def assemble_result(
    method: ReconstructionMethod,
    product: np.ndarray,
    profile: SizeDensity,
    data: SizeDensity,
    malthus: float,
    alpha: float,
    growth: GrowthLaw,
    filter_width: Optional[float] = None,
) -> ReconstructionResult:
    """Floor, evaluate the residual, then clamp.

    When the profile is the data itself the residual uses the raw product;
    a smoothed profile is mapped back through the unclamped rate, H = B·N_ε.
    """
    raw, floored = rate_from_product(product, profile)
    if profile is data:
        residual = product_residual(product, data, malthus, growth)
    else:
        residual = product_residual(raw * data.values, data, malthus, growth)

    rate, clamped, clamped_mass = clamp_rate(raw, profile)
    oversmoothed = filter_width is not None and filter_width >= support_width(data)
    diagnostics = ReconstructionDiagnostics(
        clamp_count=clamped,
        clamped_mass=clamped_mass,
        floor_count=floored,
        filter_width=filter_width,
        oversmoothed=oversmoothed,
    )
    return ReconstructionResult(
        rate=DivisionRate(grid=profile.grid, values=rate),
        lambda_used=float(malthus),
        alpha=float(alpha),
        method=method,
        residual=residual,
        diagnostics=diagnostics,
        product=product,
        profile=profile,
    )


def support_width(density: SizeDensity) -> float:
    """Width of the interval where the density clears the division floor."""
    significant = np.flatnonzero(floor_mask(np.asarray(density.values)))
    if significant.size == 0:
        return 0.0
    return float((significant[-1] - significant[0]) * density.grid.dx)


class Reconstructor(ABC):
    """Abstract base class for reconstruction methods.

    Implementations share the growth law and an optional Malthus parameter
    override (e.g. λ₀ = ln 2 / T₀ for measured data); without an override
    each method uses the λ consistent with its own regularized equation.
    """

    method: ReconstructionMethod

    def __init__(self, growth: GrowthLaw, lambda_override: Optional[float] = None) -> None:
        self.growth = growth
        self.lambda_override = lambda_override

    @abstractmethod
    def reconstruct(self, density: SizeDensity, alpha: float) -> ReconstructionResult:
        """Reconstruct B from a stationary profile.

        Args:
            density: Observed profile N_ε
            alpha: Regularization parameter (ignored by the exact solve)

        Returns:
            ReconstructionResult for this α
        """
