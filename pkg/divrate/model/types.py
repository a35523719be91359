#!/usr/bin/env python3
"""Domain types shared by every divrate module.

All profiles live on an origin-anchored uniform grid so that the dilation
x -> 2x is the exact index map i -> 2i. Instances are immutable: array
fields are copied on construction and marked read-only.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

import numpy as np
from scipy.integrate import trapezoid

from divrate.model.errors import DegenerateDensity, GridMismatch, InvalidProfile


# Constants
MIN_GRID_POINTS = 4
NORMALIZATION_RTOL = 1e-12


def _frozen_array(values: Any) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class UniformGrid:
    """Uniform volume axis x_i = i * dx, i = 0 .. n_points - 1 (μm³).

    Attributes:
        dx: Node spacing
        n_points: Number of nodes
    """

    dx: float
    n_points: int

    def __post_init__(self) -> None:
        if not (self.dx > 0 and np.isfinite(self.dx)):
            raise InvalidProfile(f"Grid spacing must be positive, got dx={self.dx}")
        if self.n_points < MIN_GRID_POINTS:
            raise InvalidProfile(
                f"Grid needs at least {MIN_GRID_POINTS} nodes, got {self.n_points}"
            )

    @classmethod
    def spanning(cls, x_max: float, n_points: int) -> "UniformGrid":
        """Grid with n_points nodes covering [0, x_max]."""
        return cls(dx=x_max / (n_points - 1), n_points=n_points)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points, dtype=float) * self.dx

    @property
    def x_max(self) -> float:
        return (self.n_points - 1) * self.dx

    def same_as(self, other: "UniformGrid") -> bool:
        return self.n_points == other.n_points and np.isclose(self.dx, other.dx, rtol=1e-12, atol=0.0)

    def require_same(self, other: "UniformGrid") -> None:
        if not self.same_as(other):
            raise GridMismatch(
                f"Grid mismatch: (dx={self.dx}, n={self.n_points}) vs "
                f"(dx={other.dx}, n={other.n_points})"
            )


@dataclass(frozen=True, eq=False)
class SizeDensity:
    """Sampled size density N(x) (or N_ε, n(t, ·)) on a uniform grid.

    Attributes:
        grid: Grid the samples live on
        values: Density per unit volume at each node
        normalized: Whether the trapezoid integral equals one
    """

    grid: UniformGrid
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self) -> None:
        values = _frozen_array(self.values)
        object.__setattr__(self, "values", values)

        if values.shape != (self.grid.n_points,):
            raise InvalidProfile(
                f"Density has {values.size} samples, grid has {self.grid.n_points} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidProfile("Density contains non-finite values")
        if np.any(values < 0):
            raise InvalidProfile(f"Density is negative at {int(np.sum(values < 0))} nodes")
        if values[0] != 0:
            raise InvalidProfile(f"Density must vanish at x=0, got {values[0]}")
        if self.normalized:
            total = trapezoid(values, dx=self.grid.dx)
            if abs(total - 1.0) > NORMALIZATION_RTOL:
                raise InvalidProfile(f"Density flagged normalized but integrates to {total!r}")

    @classmethod
    def from_values(cls, grid: UniformGrid, values: Any, normalize: bool = True) -> "SizeDensity":
        """Build a density from raw samples.

        Negative samples are clamped, the origin is forced to zero and, if
        requested, the result is rescaled to unit mass.

        Raises:
            DegenerateDensity: If normalization is requested and the mass is not positive
        """
        array = np.clip(np.array(values, dtype=float), 0.0, None)
        if array.size:
            array[0] = 0.0
        if not normalize:
            return cls(grid=grid, values=array, normalized=False)

        total = trapezoid(array, dx=grid.dx)
        if not total > 0:
            raise DegenerateDensity(f"Cannot normalize a density of total mass {total}")
        return cls(grid=grid, values=array / total, normalized=True)

    def scaled(self, factor: float) -> "SizeDensity":
        return SizeDensity(grid=self.grid, values=self.values * factor, normalized=False)

    def normalize(self) -> "SizeDensity":
        return SizeDensity.from_values(self.grid, self.values, normalize=True)


@dataclass(frozen=True, eq=False)
class DivisionRate:
    """Sampled division rate B(x) ≥ 0 (1/min).

    Attributes:
        grid: Grid the samples live on
        values: Rate at each node
    """

    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen_array(self.values)
        object.__setattr__(self, "values", values)

        if values.shape != (self.grid.n_points,):
            raise InvalidProfile(
                f"Rate has {values.size} samples, grid has {self.grid.n_points} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidProfile("Division rate contains non-finite values")
        if np.any(values < 0):
            raise InvalidProfile(f"Division rate is negative at {int(np.sum(values < 0))} nodes")

    @classmethod
    def constant(cls, grid: UniformGrid, rate: float) -> "DivisionRate":
        return cls(grid=grid, values=np.full(grid.n_points, float(rate)))

    def is_zero(self) -> bool:
        return not np.any(self.values > 0)


class GrowthKind(Enum):
    """Microscopic growth models."""

    LINEAR = "linear"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class GrowthLaw:
    """Individual growth speed g(x).

    Linear: g(x) = coefficient (g₀, μm³/min). Exponential: g(x) = coefficient * x
    (κ, 1/min).
    """

    kind: GrowthKind
    coefficient: float

    def __post_init__(self) -> None:
        if not (self.coefficient > 0 and np.isfinite(self.coefficient)):
            raise InvalidProfile(f"Growth coefficient must be positive, got {self.coefficient}")

    @classmethod
    def linear(cls, g0: float = 1.0) -> "GrowthLaw":
        return cls(GrowthKind.LINEAR, g0)

    @classmethod
    def exponential(cls, kappa: float) -> "GrowthLaw":
        return cls(GrowthKind.EXPONENTIAL, kappa)

    def speed(self, grid: UniformGrid) -> np.ndarray:
        """Evaluate g at every grid node."""
        if self.kind is GrowthKind.LINEAR:
            return np.full(grid.n_points, self.coefficient)
        return self.coefficient * grid.nodes

    def max_speed(self, grid: UniformGrid) -> float:
        if self.kind is GrowthKind.LINEAR:
            return self.coefficient
        return self.coefficient * grid.x_max


@dataclass(frozen=True)
class EigenPair:
    """Principal eigenpair (N, λ₀) of the stationary problem.

    Attributes:
        density: Normalized steady size distribution
        malthus: Malthus parameter λ₀ (1/min)
        moment_malthus: λ recomputed from the density by the moment identity
        steps: Iterations the solver needed
    """

    density: SizeDensity
    malthus: float
    moment_malthus: float
    steps: int = 0

    def __post_init__(self) -> None:
        if not self.malthus > 0:
            raise DegenerateDensity(f"Malthus parameter must be positive, got {self.malthus}")
        if not self.density.normalized:
            raise InvalidProfile("Eigen density must be normalized")


@dataclass(frozen=True)
class DatasetMeta:
    """Experimental metadata attached to a measured histogram.

    Attributes:
        doubling_time: Population doubling time T₀ (min)
        mean_volume: Mean cell volume V_b (μm³)
        diameter_sigma: Instrument standard deviation on the diameter (μm)
        label: Free-form dataset label
    """

    doubling_time: Optional[float] = None
    mean_volume: Optional[float] = None
    diameter_sigma: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        if self.doubling_time is not None and not self.doubling_time > 0:
            raise InvalidProfile(f"doubling_time must be positive, got {self.doubling_time}")
        if self.mean_volume is not None and not self.mean_volume > 0:
            raise InvalidProfile(f"mean_volume must be positive, got {self.mean_volume}")
        if self.diameter_sigma < 0:
            raise InvalidProfile(f"diameter_sigma must be nonnegative, got {self.diameter_sigma}")


@dataclass(frozen=True)
class TransientState:
    """Population snapshot n(t, ·) with its total number 𝒩(t) and biomass ℳ(t)."""

    time: float
    density: SizeDensity
    total_number: float
    total_biomass: float

    @classmethod
    def at(cls, time: float, density: SizeDensity) -> "TransientState":
        grid = density.grid
        return cls(
            time=time,
            density=density,
            total_number=float(trapezoid(density.values, dx=grid.dx)),
            total_biomass=float(trapezoid(grid.nodes * density.values, dx=grid.dx)),
        )

