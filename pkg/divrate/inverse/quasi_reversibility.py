#!/usr/bin/env python3
"""Quasi-reversibility regularization.

With y = 2x and H = B·N_ε the dilation equation is relaxed to

    α H'(y) + 4H(y) = H(y/2) + [(gN_ε)' + λN_ε](y/2),   H(0) = 0,

and marched upward in y by implicit Euler. Values at y/2 are exact nodes
for even indices and linear interpolations for odd ones.
"""

import logging
from typing import Optional

import numpy as np

from divrate.inverse.base import (
    ReconstructionMethod,
    ReconstructionResult,
    Reconstructor,
    assemble_result,
    check_alpha,
)
from divrate.inverse.operators import rhs_L
from divrate.model.quantities import malthus_regularized
from divrate.model.types import GrowthLaw, SizeDensity


logger = logging.getLogger(__name__)


def half_point_values(values: np.ndarray) -> np.ndarray:
    """Samples of v(y_i/2): node i/2 for even i, midpoint average for odd i."""
    n = values.size
    index = np.arange(n)
    lower = index // 2
    upper = np.minimum((index + 1) // 2, n - 1)
    return 0.5 * (values[lower] + values[upper])


def march_product(source_half: np.ndarray, alpha: float, dx: float) -> np.ndarray:
    """Implicit Euler march of αH' + 4H = H(y/2) + S(y/2) from H_0 = 0."""
    n = source_half.size
    ratio = alpha / dx
    product = np.zeros(n)
    if n > 1:
        # y_1/2 lies between nodes 0 and 1, so H_1 enters its own right-hand side
        product[1] = (ratio * product[0] + 0.5 * product[0] + source_half[1]) / (ratio + 3.5)
    for i in range(2, n):
        if i % 2 == 0:
            dilated = product[i // 2]
        else:
            j = (i - 1) // 2
            dilated = 0.5 * (product[j] + product[j + 1])
        product[i] = (ratio * product[i - 1] + dilated + source_half[i]) / (ratio + 4.0)
    return product


def qr_product(profile: SizeDensity, alpha: float, malthus: float, growth: GrowthLaw) -> np.ndarray:
    source = rhs_L(profile, malthus, growth)
    return march_product(half_point_values(source), alpha, profile.grid.dx)


def quasi_reversibility(
    density: SizeDensity,
    alpha: float,
    growth: GrowthLaw,
    lambda_override: Optional[float] = None,
) -> ReconstructionResult:
    """Reconstruct B by the quasi-reversibility march.

    λ defaults to ∫gN_ε / (∫xN_ε + (α/4)∫N_ε), the value compatible with
    the relaxed equation.

    Raises:
        NonPositiveAlpha: If alpha is not positive
    """
    alpha = check_alpha(alpha)
    if lambda_override is not None:
        malthus = lambda_override
    else:
        malthus = malthus_regularized(density, alpha, growth)

    product = qr_product(density, alpha, malthus, growth)
    result = assemble_result(
        ReconstructionMethod.QUASI_REVERSIBILITY, product, density, density, malthus, alpha, growth
    )
    logger.debug(f"Quasi-reversibility α={alpha:g}: λ={malthus:.6g}, residual={result.residual:.3e}")
    return result


class QuasiReversibilityReconstructor(Reconstructor):
    """Quasi-reversibility march at the requested α."""

    method = ReconstructionMethod.QUASI_REVERSIBILITY

    def reconstruct(self, density: SizeDensity, alpha: float) -> ReconstructionResult:
        return quasi_reversibility(density, alpha, self.growth, self.lambda_override)
