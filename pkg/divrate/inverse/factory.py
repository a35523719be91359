#!/usr/bin/env python3
"""Factory for creating reconstruction method instances."""

from typing import Optional, Union

from divrate.inverse.base import ReconstructionMethod, Reconstructor
from divrate.model.types import GrowthLaw


def create_reconstructor(
    method: Union[ReconstructionMethod, str],
    growth: GrowthLaw,
    lambda_override: Optional[float] = None,
    filter_width: Optional[float] = None,
) -> Reconstructor:
    """Create a reconstructor for the given method.

    Args:
        method: Method enum or its CLI name (exact, qr, filter, hybrid)
        growth: Growth law of the model
        lambda_override: Fixed Malthus parameter, e.g. from the doubling time
        filter_width: Mollifier width of the hybrid method

    Returns:
        Reconstructor instance

    Raises:
        ValueError: If the method name is unknown
    """
    if isinstance(method, str):
        try:
            method = ReconstructionMethod(method)
        except ValueError:
            valid = ", ".join(m.value for m in ReconstructionMethod)
            raise ValueError(f"Unknown reconstruction method '{method}'. Valid methods: {valid}") from None

    if method is ReconstructionMethod.EXACT:
        from divrate.inverse.exact import ExactReconstructor

        return ExactReconstructor(growth, lambda_override)

    if method is ReconstructionMethod.QUASI_REVERSIBILITY:
        from divrate.inverse.quasi_reversibility import QuasiReversibilityReconstructor

        return QuasiReversibilityReconstructor(growth, lambda_override)

    if method is ReconstructionMethod.FILTERING:
        from divrate.inverse.filtering import FilteringReconstructor

        return FilteringReconstructor(growth, lambda_override)

    from divrate.inverse.hybrid import DEFAULT_FILTER_WIDTH, HybridReconstructor

    width = filter_width if filter_width else DEFAULT_FILTER_WIDTH
    return HybridReconstructor(growth, lambda_override, filter_width=width)
