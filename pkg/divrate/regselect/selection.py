#!/usr/bin/env python3
"""Choosing α from a sweep: the residual/√α rule and an L-curve corner."""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from divrate.inverse.base import RegularizationError
from divrate.regselect.sweep import AlphaSweep, EmptySweep


logger = logging.getLogger(__name__)

# Constants
FLATNESS_TOLERANCE = 0.05
MIN_LCURVE_POINTS = 3
CURVATURE_EPSILON = 1e-12


class TooFewPoints(RegularizationError):
    """Not enough sweep points for the L-curve."""


def select_alpha_ratio(sweep: AlphaSweep) -> Tuple[float, bool]:
    """α minimizing residual/√α, and whether the curve is flat there.

    The curve is flat when the ratio at every sampled neighbour of the
    minimizer is within 5% of the minimum.

    Raises:
        EmptySweep: If the sweep holds no successful α
    """
    if len(sweep) == 0:
        raise EmptySweep("Cannot select α from an empty sweep")

    ratios = np.asarray(sweep.ratios)
    best = int(np.argmin(ratios))
    minimum = ratios[best]

    neighbours = [ratios[j] for j in (best - 1, best + 1) if 0 <= j < ratios.size]
    if not neighbours:
        flat = False
    elif minimum > 0:
        flat = all(abs(value - minimum) < FLATNESS_TOLERANCE * minimum for value in neighbours)
    else:
        flat = all(value == minimum for value in neighbours)

    alpha = sweep.alphas[best]
    logger.info(f"Residual/√α minimum at α={alpha:g} (ratio {minimum:.4g}, flat={flat})")
    return alpha, flat


def menger_curvature(points: np.ndarray) -> np.ndarray:
    """Three-point curvature 2|cross|/(|a||b||c|) at each interior point."""
    before = points[1:-1] - points[:-2]
    after = points[2:] - points[1:-1]
    chord = points[2:] - points[:-2]
    cross = before[:, 0] * after[:, 1] - before[:, 1] * after[:, 0]
    lengths = (
        np.linalg.norm(before, axis=1) * np.linalg.norm(after, axis=1) * np.linalg.norm(chord, axis=1)
    )
    curvature = np.zeros(len(cross))
    nonzero = lengths > 0
    curvature[nonzero] = 2.0 * np.abs(cross[nonzero]) / lengths[nonzero]
    return curvature


def select_alpha_lcurve(
    sweep: AlphaSweep, solution_norms: Optional[Sequence[float]] = None
) -> Tuple[float, bool]:
    """α at the corner of the log-log curve (log residual, log ‖B·N‖).

    Args:
        sweep: α sweep
        solution_norms: Norms per α, defaults to the sweep's own

    Returns:
        Tuple of (alpha, degenerate). Degenerate curves (no curvature
        anywhere) return the middle α.

    Raises:
        TooFewPoints: If fewer than three points are available
        ValueError: If the norms do not match the sweep length
    """
    norms = list(sweep.solution_norms if solution_norms is None else solution_norms)
    if len(norms) != len(sweep):
        raise ValueError(f"{len(norms)} solution norms for {len(sweep)} sweep points")
    if len(sweep) < MIN_LCURVE_POINTS:
        raise TooFewPoints(f"L-curve needs at least {MIN_LCURVE_POINTS} points, got {len(sweep)}")

    tiny = np.finfo(float).tiny
    points = np.column_stack(
        [
            np.log(np.maximum(np.asarray(sweep.residuals, dtype=float), tiny)),
            np.log(np.maximum(np.asarray(norms, dtype=float), tiny)),
        ]
    )
    curvature = menger_curvature(points)

    if not np.any(curvature > CURVATURE_EPSILON):
        middle = len(sweep) // 2
        logger.warning("L-curve has no corner; returning the middle α")
        return sweep.alphas[middle], True

    best = int(np.argmax(curvature)) + 1
    logger.info(f"L-curve corner at α={sweep.alphas[best]:g} (curvature {curvature[best - 1]:.4g})")
    return sweep.alphas[best], False
