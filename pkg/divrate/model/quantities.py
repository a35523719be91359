#!/usr/bin/env python3
"""Quadrature and closed-form scalar quantities of the division model.

All integrals are composite trapezoid sums on the uniform grid, truncated
at the grid end.
"""

import logging
import math
from typing import Tuple

import numpy as np
from scipy.integrate import trapezoid

from divrate.model.errors import DegenerateDensity
from divrate.model.types import DatasetMeta, GrowthKind, GrowthLaw, SizeDensity, UniformGrid


logger = logging.getLogger(__name__)

# (π/6)·√15: converts a diameter standard deviation into a volume one
VOLUME_SIGMA_FACTOR = math.pi / 6.0 * math.sqrt(15.0)


def trapezoid_moment(values: np.ndarray, grid: UniformGrid, k: int) -> float:
    """Trapezoid approximation of ∫ x^k f(x) dx for raw samples f on the grid."""
    if k < 0:
        raise ValueError(f"Moment order must be nonnegative, got {k}")
    weights = grid.nodes**k if k else 1.0
    return float(trapezoid(np.asarray(values, dtype=float) * weights, dx=grid.dx))


def moment(d: SizeDensity, k: int) -> float:
    """Return ∫ x^k d(x) dx over the grid."""
    return trapezoid_moment(d.values, d.grid, k)


def malthus_from_density(density: SizeDensity, growth: GrowthLaw) -> float:
    """Malthus parameter from the moment identity λ₀ = ∫gN / ∫xN.

    Raises:
        DegenerateDensity: If the first moment is not positive
    """
    first = moment(density, 1)
    if not first > 0:
        raise DegenerateDensity(f"First moment of the density is {first}")
    if growth.kind is GrowthKind.EXPONENTIAL:
        # ∫κxN / ∫xN cancels exactly
        return growth.coefficient
    return growth.coefficient * moment(density, 0) / first


def malthus_regularized(
    density: SizeDensity, alpha: float, growth: GrowthLaw = GrowthLaw.linear(1.0)
) -> float:
    """Regularized Malthus parameter ∫gN / (∫xN + (α/4)∫N).

    With the default unit linear growth this is the quasi-reversibility
    choice ∫N / (∫xN + (α/4)∫N); at α = 0 it reduces to the moment identity
    for any growth law.

    Raises:
        DegenerateDensity: If the denominator is not positive
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")

    zeroth = moment(density, 0)
    first = moment(density, 1)
    denominator = first + 0.25 * alpha * zeroth
    if not denominator > 0:
        raise DegenerateDensity(f"Regularized Malthus denominator is {denominator}")

    if growth.kind is GrowthKind.EXPONENTIAL:
        numerator = growth.coefficient * first
    else:
        numerator = growth.coefficient * zeroth
    return numerator / denominator


def malthus_from_doubling(doubling_time: float) -> float:
    """λ₀ = ln 2 / T₀."""
    if not doubling_time > 0:
        raise ValueError(f"doubling_time must be positive, got {doubling_time}")
    return math.log(2.0) / doubling_time


def growth_constant_from_doubling(
    meta: DatasetMeta, density: SizeDensity, exponential: bool = False
) -> Tuple[float, GrowthLaw]:
    """Deduce λ₀ from the doubling time and the matching growth law.

    Linear model: g₀ = λ₀ ∫xN / ∫N. Exponential model: κ = λ₀.

    Args:
        meta: Dataset metadata carrying the doubling time
        density: Measured size density
        exponential: Select the exponential growth model

    Returns:
        Tuple of (lambda0, growth law)

    Raises:
        DegenerateDensity: If the density moments are not positive
    """
    if meta.doubling_time is None:
        raise ValueError("Dataset metadata has no doubling time")
    lambda0 = malthus_from_doubling(meta.doubling_time)

    if exponential:
        return lambda0, GrowthLaw.exponential(lambda0)

    zeroth = moment(density, 0)
    first = moment(density, 1)
    if not (zeroth > 0 and first > 0):
        raise DegenerateDensity(f"Density moments are not positive (m0={zeroth}, m1={first})")
    g0 = lambda0 * first / zeroth
    logger.debug(f"Linear growth constant g0={g0:.6g} from T0={meta.doubling_time} min")
    return lambda0, GrowthLaw.linear(g0)


def volume_sigma(diameter_sigma: float) -> float:
    """Volume standard deviation (π/6)·√15·σ³ for a diameter deviation σ."""
    if diameter_sigma < 0:
        raise ValueError(f"diameter_sigma must be nonnegative, got {diameter_sigma}")
    return VOLUME_SIGMA_FACTOR * diameter_sigma**3


def l1_distance(a: SizeDensity, b: SizeDensity) -> float:
    """∫|a − b| on a shared grid."""
    a.grid.require_same(b.grid)
    return float(trapezoid(np.abs(np.asarray(a.values) - b.values), dx=a.grid.dx))
