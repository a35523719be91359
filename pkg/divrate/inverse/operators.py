#!/usr/bin/env python3
"""Discrete operators of the stationary division equation.

The stationary problem is rewritten for the product H = B·N as the
dilation equation

    4H(2x) − H(x) = L(x),   L = (gN)' + λN,

which on the origin-anchored grid couples node i to node 2i only.
"""

import logging
from typing import Tuple

import numpy as np
from scipy.integrate import trapezoid

from divrate.model.errors import GridMismatch
from divrate.model.types import DivisionRate, GrowthLaw, SizeDensity, UniformGrid


logger = logging.getLogger(__name__)

# Constants
DIVISION_FLOOR = 1e-3  # B = H/N only where N ≥ DIVISION_FLOOR · max N


def rhs_L(density: SizeDensity, malthus: float, growth: GrowthLaw) -> np.ndarray:
    """Forcing L = (gN)' + λN.

    Second-order centered differences in the interior, second-order
    one-sided differences at both ends.
    """
    grid = density.grid
    values = np.asarray(density.values)
    flux = growth.speed(grid) * values
    return np.gradient(flux, grid.dx, edge_order=2) + malthus * values


def dilation(values: np.ndarray) -> np.ndarray:
    """Return 4·v(2x) on the grid, zero where 2x leaves it."""
    out = np.zeros_like(values, dtype=float)
    half = (values.size + 1) // 2
    out[:half] = 4.0 * values[0 : 2 * half : 2]
    return out


def dilation_product(forcing: np.ndarray) -> np.ndarray:
    """Solve 4H(2x) − H(x) = L(x) by backward recursion from the grid end.

    H vanishes beyond the last node, so H_i = 4H_{2i} − L_i fixes every
    node i ≥ 1 block by block ([⌈hi/2⌉, hi) only reads nodes ≥ hi). The
    origin satisfies 3H_0 = L_0.
    """
    forcing = np.asarray(forcing, dtype=float)
    n = forcing.size
    extended = np.zeros(2 * n)
    product = extended[:n]

    hi = n
    while hi > 1:
        lo = (hi + 1) // 2
        product[lo:hi] = 4.0 * extended[2 * lo : 2 * hi : 2] - forcing[lo:hi]
        hi = lo
    product[0] = forcing[0] / 3.0
    return product.copy()


def floor_mask(values: np.ndarray) -> np.ndarray:
    """Nodes where the density is large enough to divide by."""
    peak = float(np.max(values)) if values.size else 0.0
    if not peak > 0:
        return np.zeros(values.shape, dtype=bool)
    return values >= DIVISION_FLOOR * peak


def rate_from_product(product: np.ndarray, density: SizeDensity) -> Tuple[np.ndarray, int]:
    """Unclamped B = H/N on the division floor mask, zero elsewhere.

    Returns:
        Tuple of (raw rate values, number of floored nodes)
    """
    values = np.asarray(density.values)
    mask = floor_mask(values)
    raw = np.zeros_like(values)
    raw[mask] = product[mask] / values[mask]
    return raw, int(np.count_nonzero(~mask))


def clamp_rate(raw: np.ndarray, density: SizeDensity) -> Tuple[np.ndarray, int, float]:
    """Clamp negative rates to zero.

    Returns:
        Tuple of (clamped rate values, clamped node count, clamped mass ∫(B·N)₋)
    """
    negative = raw < 0
    clamped_mass = float(-np.sum(raw[negative] * density.values[negative]) * density.grid.dx)
    rate = np.where(negative, 0.0, raw)
    return rate, int(np.count_nonzero(negative)), clamped_mass


def solve_dilation(forcing: np.ndarray, density: SizeDensity) -> DivisionRate:
    """Division rate B solving 4B(2x)N(2x) − B(x)N(x) = L(x).

    Raises:
        GridMismatch: If L does not have one value per node of N's grid
    """
    grid = density.grid
    _require_samples(forcing, grid)
    product = dilation_product(forcing)
    raw, floored = rate_from_product(product, density)
    rate, clamped, _ = clamp_rate(raw, density)
    if floored or clamped:
        logger.debug(f"Dilation solve: {floored} nodes floored, {clamped} negative rates clamped")
    return DivisionRate(grid=grid, values=rate)


def product_residual(
    product: np.ndarray, density: SizeDensity, malthus: float, growth: GrowthLaw
) -> float:
    """Trapezoid L² norm of 4H(2x) − H(x) − [(gN)' + λN] over the grid."""
    grid = density.grid
    product = np.asarray(product, dtype=float)
    _require_samples(product, grid)
    defect = dilation(product) - product - rhs_L(density, malthus, growth)
    return float(np.sqrt(trapezoid(defect * defect, dx=grid.dx)))


def _require_samples(values: np.ndarray, grid: UniformGrid) -> None:
    if np.shape(values) != (grid.n_points,):
        raise GridMismatch(f"Expected {grid.n_points} samples, got shape {np.shape(values)}")
