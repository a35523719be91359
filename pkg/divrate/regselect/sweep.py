#!/usr/bin/env python3
"""Regularization-parameter sweeps.

Runs one reconstruction method over a list of α values. Each α is an
independent pure computation, so the sweep fans out over a thread pool;
numpy releases the GIL in the convolution and vector kernels.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from divrate.inverse.base import (
    ReconstructionMethod,
    ReconstructionResult,
    RegularizationError,
    check_alpha,
)
from divrate.inverse.factory import create_reconstructor
from divrate.model.errors import DivrateError
from divrate.model.types import GrowthLaw, SizeDensity
from divrate.regselect.residual import solution_norm


logger = logging.getLogger(__name__)

# Constants
THREADS_ENV = "DIVRATE_THREADS"
DEFAULT_MAX_WORKERS = 4


class EmptySweep(RegularizationError):
    """Sweep has no usable α."""


@dataclass
class AlphaSweep:
    """Reconstructions of one method over ascending α.

    Attributes:
        method: Reconstruction method
        alphas: Successful α values, strictly increasing
        results: Reconstruction per α (same order)
        residuals: Residual per α
        ratios: residual/√α per α
        solution_norms: ‖B·N_ε‖_{L²} per α
        failures: Reason per α whose reconstruction failed
    """

    method: ReconstructionMethod
    alphas: List[float] = field(default_factory=list)
    results: List[ReconstructionResult] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    solution_norms: List[float] = field(default_factory=list)
    failures: Dict[float, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.alphas)

    def add(self, alpha: float, result: ReconstructionResult, norm: float) -> None:
        if self.alphas and alpha <= self.alphas[-1]:
            raise ValueError(f"Sweep α must increase: {alpha} after {self.alphas[-1]}")
        self.alphas.append(alpha)
        self.results.append(result)
        self.residuals.append(result.residual)
        self.ratios.append(result.residual / math.sqrt(alpha))
        self.solution_norms.append(norm)

    def result_for(self, alpha: float) -> ReconstructionResult:
        for candidate, result in zip(self.alphas, self.results):
            if math.isclose(candidate, alpha, rel_tol=1e-12):
                return result
        raise KeyError(f"No reconstruction for α={alpha}")


def default_workers() -> int:
    """Worker count from DIVRATE_THREADS, else a small default."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
        except ValueError:
            pass
        logger.warning(f"Ignoring invalid {THREADS_ENV}={raw!r}")
    return DEFAULT_MAX_WORKERS


def sweep_alpha(
    method: Union[ReconstructionMethod, str],
    density: SizeDensity,
    alphas: Sequence[float],
    growth: GrowthLaw,
    lambda_override: Optional[float] = None,
    filter_width: Optional[float] = None,
    max_workers: Optional[int] = None,
) -> AlphaSweep:
    """Run a reconstruction method at every α.

    Failed reconstructions are left out of the sweep lists and recorded in
    AlphaSweep.failures with their reason.

    Args:
        method: Reconstruction method
        density: Observed profile N_ε
        alphas: Regularization parameters, positive and distinct
        growth: Growth law
        lambda_override: Fixed Malthus parameter
        filter_width: Mollifier width of the hybrid method
        max_workers: Thread count (defaults to DIVRATE_THREADS or 4)

    Raises:
        EmptySweep: If no α is given
        NonPositiveAlpha: If an α is not positive
        ValueError: If α values repeat
    """
    if not alphas:
        raise EmptySweep("α list is empty")
    ordered = sorted(check_alpha(alpha) for alpha in alphas)
    if len(set(ordered)) != len(ordered):
        raise ValueError(f"α values must be distinct: {list(alphas)}")

    reconstructor = create_reconstructor(method, growth, lambda_override, filter_width)
    workers = min(max_workers or default_workers(), len(ordered))
    logger.info(f"Sweeping {reconstructor.method.value} over {len(ordered)} α values ({workers} workers)")

    completed: Dict[float, ReconstructionResult] = {}
    failures: Dict[float, str] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(reconstructor.reconstruct, density, alpha): alpha for alpha in ordered
        }
        for future in as_completed(futures):
            alpha = futures[future]
            try:
                completed[alpha] = future.result()
            except DivrateError as exc:
                logger.warning(f"Reconstruction failed at α={alpha:g}: {exc}")
                failures[alpha] = str(exc)

    sweep = AlphaSweep(method=reconstructor.method, failures=failures)
    for alpha in ordered:
        if alpha in completed:
            result = completed[alpha]
            sweep.add(alpha, result, solution_norm(result.rate, density))
    return sweep
