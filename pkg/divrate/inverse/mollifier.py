#!/usr/bin/env python3
"""Canonical bump mollifier and its discrete convolution weights.

ρ(s) = C·exp(−1/(s(1−s))) on (0, 1) and zero elsewhere, with C chosen so
that ∫ρ = 1; ρ_α(x) = ρ(x/α)/α is supported in [0, α]. Convolutions use the kernel centered on its peak.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from scipy.integrate import quad

from divrate.inverse.base import check_alpha
from divrate.model.types import UniformGrid


logger = logging.getLogger(__name__)

# Constants
QUAD_TOLERANCE = 1e-10
GAUSS_ORDER = 16
KERNEL_SUBDIVISIONS = 64


def _bump_shape(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0) & (s < 1)
    t = s[inside]
    out[inside] = np.exp(-1.0 / (t * (1.0 - t)))
    return out


@lru_cache(maxsize=1)
def bump_constant() -> float:
    """Normalization C of the canonical bump."""
    area, _ = quad(
        lambda s: math.exp(-1.0 / (s * (1.0 - s))) if 0.0 < s < 1.0 else 0.0,
        0.0,
        1.0,
        epsabs=QUAD_TOLERANCE * 1e-3,
        epsrel=QUAD_TOLERANCE,
    )
    return 1.0 / area


@dataclass(frozen=True)
class Mollifier:
    """Unit-mass bump of width alpha.

    Attributes:
        alpha: Support width
        constant: Normalization constant C of the canonical bump
    """

    alpha: float
    constant: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate ρ_α(x)."""
        s = np.asarray(x, dtype=float) / self.alpha
        return self.constant * _bump_shape(s) / self.alpha

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """Evaluate d/dx ρ_α(x) analytically."""
        s = np.asarray(x, dtype=float) / self.alpha
        out = np.zeros_like(s)
        inside = (s > 0) & (s < 1)
        t = s[inside]
        shape = np.exp(-1.0 / (t * (1.0 - t)))
        out[inside] = shape * (1.0 - 2.0 * t) / (t * (1.0 - t)) ** 2
        return self.constant * out / self.alpha**2

    def mass(self) -> float:
        """∫ρ_α by adaptive quadrature."""
        area, _ = quad(
            lambda x: float(self(np.array([x]))[0]),
            0.0,
            self.alpha,
            epsabs=QUAD_TOLERANCE * 1e-3,
            epsrel=QUAD_TOLERANCE,
        )
        return area

    def cell_integrals(
        self, kernel: Callable[[np.ndarray], np.ndarray], dx: float
    ) -> Tuple[np.ndarray, np.ndarray, int]:
        """Integrals of the centered kernel s ↦ f(s + α/2) over grid cells.

        Cell k is [k·dx, (k+1)·dx] and the cells cover [−α/2, α/2].

        Returns:
            Tuple (a, b, first) with a_k = ∫_cell f and b_k = ∫_cell τ f, where
            τ is the position inside the cell scaled to [0, 1], and first the
            index of the leftmost cell
        """
        half = 0.5 * self.alpha
        first = int(math.floor(-half / dx + 1e-12))
        last = max(first + 1, int(math.ceil(half / dx - 1e-12)))
        n_cells = last - first

        grid_edges = np.arange(first, last + 1) * dx
        edges = np.union1d(
            np.clip(grid_edges, -half, half),
            np.linspace(-half, half, KERNEL_SUBDIVISIONS + 1),
        )
        nodes, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)

        left = edges[:-1, None]
        width = np.diff(edges)[:, None]
        points = left + 0.5 * width * (nodes[None, :] + 1.0)
        values = kernel(points + half) * (0.5 * width * weights[None, :])

        cells = np.clip(np.floor(points / dx).astype(int), first, last - 1)
        tau = points / dx - cells
        index = (cells - first).ravel()
        a = np.bincount(index, weights=values.ravel(), minlength=n_cells)
        b = np.bincount(index, weights=(tau * values).ravel(), minlength=n_cells)
        return a, b, first

    def weights(self, grid: UniformGrid) -> Tuple[np.ndarray, np.ndarray, int]:
        """Discrete convolution weights for smoothing and for the derivative.

        The kernel is centered on its peak, so smoothing does not shift the
        profile. Each weight is the exact integral of the kernel (respectively
        its analytic derivative) against the piecewise-linear interpolant of
        the data, so Σ_j w_j N_{i−j} = (N ∗ ρ_α)(x_i + α/2) for such data. The
        smoothing weights are rescaled to unit sum.

        Returns:
            Tuple (smooth, derivative, offset) where weight m multiplies
            N_{i−m−offset}
        """
        a, b, first = self.cell_integrals(self, grid.dx)
        smooth = _interpolant_weights(a, b)
        smooth /= np.sum(smooth)

        da, db, _ = self.cell_integrals(self.derivative, grid.dx)
        derivative = _interpolant_weights(da, db)
        return smooth, derivative, first


def _interpolant_weights(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # N(x_i − s) = (1 − τ)N_{i−k} + τN_{i−k−1} on cell k
    weights = np.zeros(a.size + 1)
    weights[:-1] += a - b
    weights[1:] += b
    return weights


def make_mollifier(alpha: float) -> Mollifier:
    """Canonical bump of width alpha.

    Raises:
        NonPositiveAlpha: If alpha is not positive
    """
    alpha = check_alpha(alpha)
    return Mollifier(alpha=alpha, constant=bump_constant())


def convolve(values: np.ndarray, weights: np.ndarray, offset: int = 0) -> np.ndarray:
    """Discrete convolution out_i = Σ_m w_m v_{i−m−offset}, truncated to the grid.

    Samples outside the grid count as zero.
    """
    values = np.asarray(values, dtype=float)
    start = -offset
    return np.convolve(values, weights)[start : start + values.size]
