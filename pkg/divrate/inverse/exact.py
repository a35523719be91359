#!/usr/bin/env python3
"""Unregularized inversion: solve the dilation equation on the data as given."""

import logging

from divrate.inverse.base import (
    ReconstructionMethod,
    ReconstructionResult,
    Reconstructor,
    assemble_result,
)
from divrate.inverse.operators import dilation_product, rhs_L
from divrate.model.quantities import malthus_regularized
from divrate.model.types import SizeDensity


logger = logging.getLogger(__name__)


class ExactReconstructor(Reconstructor):
    """Direct dilation solve. Exact on clean data, unstable under noise."""

    method = ReconstructionMethod.EXACT

    def reconstruct(self, density: SizeDensity, alpha: float = 0.0) -> ReconstructionResult:
        if self.lambda_override is not None:
            malthus = self.lambda_override
        else:
            malthus = malthus_regularized(density, 0.0, self.growth)

        product = dilation_product(rhs_L(density, malthus, self.growth))
        result = assemble_result(
            self.method, product, density, density, malthus, 0.0, self.growth
        )
        logger.debug(f"Exact solve: λ={malthus:.6g}, residual={result.residual:.3e}")
        return result
