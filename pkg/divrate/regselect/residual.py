#!/usr/bin/env python3
"""Residual of a reconstructed rate in the stationary division equation."""

import numpy as np
from scipy.integrate import trapezoid

from divrate.inverse.operators import product_residual
from divrate.model.types import DivisionRate, GrowthLaw, SizeDensity


def residual(rate: DivisionRate, density: SizeDensity, malthus: float, growth: GrowthLaw) -> float:
    """Trapezoid L² norm of 4B(2x)N(2x) − B(x)N(x) − [(gN)' + λN].

    Raises:
        GridMismatch: If B and N live on different grids
    """
    rate.grid.require_same(density.grid)
    return product_residual(np.asarray(rate.values) * density.values, density, malthus, growth)


def solution_norm(rate: DivisionRate, density: SizeDensity) -> float:
    """Trapezoid L² norm of B·N."""
    rate.grid.require_same(density.grid)
    product = np.asarray(rate.values) * density.values
    return float(np.sqrt(trapezoid(product * product, dx=density.grid.dx)))


def rate_error(
    estimate: DivisionRate, truth: DivisionRate, density: SizeDensity, region: float = 0.01
) -> float:
    """Relative N-weighted L² error of B on {N ≥ region · max N}.

    sqrt(∫(B̂ − B)²N / ∫B²N) over the region.
    """
    estimate.grid.require_same(truth.grid)
    truth.grid.require_same(density.grid)
    values = np.asarray(density.values)
    weight = np.where(values >= region * values.max(), values, 0.0)
    difference = (np.asarray(estimate.values) - truth.values) ** 2 * weight
    reference = np.asarray(truth.values) ** 2 * weight
    return float(np.sqrt(trapezoid(difference, dx=density.grid.dx) / trapezoid(reference, dx=density.grid.dx)))
