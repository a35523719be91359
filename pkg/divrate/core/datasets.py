#!/usr/bin/env python3
"""Synthetic rate shapes and the bundled dataset presets of `divrate synth`.

Each preset is generated by the forward eigen solver from a known rate, so
it doubles as an oracle for the inversion methods.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from divrate.model.types import DivisionRate, UniformGrid


RateShape = Callable[[np.ndarray], np.ndarray]


def bump_rate(
    x: np.ndarray, base: float = 0.5, height: float = 3.0, center: float = 2.0, width: float = 0.25
) -> np.ndarray:
    """Background rate plus a Gaussian bump of divisions near `center`."""
    return base + height * np.exp(-((x - center) ** 2) / (2.0 * width**2))


def plateau_rate(
    x: np.ndarray, floor: float = 0.2, ceiling: float = 2.0, onset: float = 1.5, steepness: float = 0.1
) -> np.ndarray:
    """Logistic rise from `floor` to a plateau at `ceiling`."""
    return floor + (ceiling - floor) / (1.0 + np.exp(-(x - onset) / steepness))


def constant_rate(value: float) -> RateShape:
    def shape(x: np.ndarray) -> np.ndarray:
        return np.full_like(x, value, dtype=float)

    return shape


def sample_rate(shape: RateShape, grid: UniformGrid) -> DivisionRate:
    return DivisionRate(grid=grid, values=shape(grid.nodes))


@dataclass(frozen=True)
class SyntheticDataset:
    """Preset synthetic histogram.

    Attributes:
        name: Preset name
        description: One-line description
        rate: Division rate shape B(x)
        doubling_time: Target doubling time T₀ (min); time is rescaled to match
        x_max: Domain end of the generating solve
        channels: Number of histogram channels
        epsilon: Noise level applied before sampling
        seed: Noise seed
    """

    name: str
    description: str
    rate: RateShape
    doubling_time: Optional[float] = None
    x_max: float = 12.0
    channels: int = 64
    epsilon: float = 0.0
    seed: int = 0


DATASETS: Dict[str, SyntheticDataset] = {
    "fast-20min": SyntheticDataset(
        name="fast-20min",
        description="Bump-shaped rate, 20 min doubling time",
        rate=bump_rate,
        doubling_time=20.0,
        channels=128,
        epsilon=1e-2,
        seed=20,
    ),
    "slow-54min": SyntheticDataset(
        name="slow-54min",
        description="Bump-shaped rate, 54 min doubling time",
        rate=bump_rate,
        doubling_time=54.0,
        channels=128,
        epsilon=1e-2,
        seed=54,
    ),
    "plateau": SyntheticDataset(
        name="plateau",
        description="Logistic rate saturating at a plateau",
        rate=plateau_rate,
        doubling_time=30.0,
        channels=128,
        epsilon=1e-2,
        seed=7,
    ),
    "constant": SyntheticDataset(
        name="constant",
        description="Constant unit rate, clean",
        rate=constant_rate(1.0),
    ),
}


def get_dataset(name: str) -> SyntheticDataset:
    """Look up a preset.

    Raises:
        ValueError: If the name is unknown
    """
    try:
        return DATASETS[name]
    except KeyError:
        valid = ", ".join(sorted(DATASETS))
        raise ValueError(f"Unknown dataset '{name}'. Valid datasets: {valid}") from None
