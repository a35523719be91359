#!/usr/bin/env python3
"""Measured size histograms: parsing, boundary completion, spline interpolation, noise.

Histogram files are CSV with a `volume,count` (or `x,N`) header and optional
`# key=value` metadata lines:

    # doubling_time_min=20
    # mean_volume=1.36
    # sigma_um=0.03
    # label=strain A
    volume,count
    0.25,12.0
    ...
"""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from divrate.model.errors import DivrateError, GridMismatch
from divrate.model.types import DatasetMeta, SizeDensity, UniformGrid


logger = logging.getLogger(__name__)

# Constants
MIN_HISTOGRAM_POINTS = 4
DEFAULT_N_POINTS = 2**10 + 1
MEAN_VOLUME_SPAN = 4.0
MAX_VOLUME_SPAN = 1.5
HEADERS = (("volume", "count"), ("x", "n"))
METADATA_KEYS = {
    "doubling_time_min": "doubling_time",
    "mean_volume": "mean_volume",
    "sigma_um": "diameter_sigma",
    "label": "label",
}

Source = Union[str, Path, TextIO]


class IngestError(DivrateError):
    """Base exception for input data errors."""


class InputFileError(IngestError):
    """Input file cannot be opened or read."""

    exit_code = 2


class ParseError(IngestError):
    """Malformed histogram content."""

    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class NonMonotoneVolumes(IngestError):
    """Histogram volumes are not strictly increasing."""

    exit_code = 3


class MissingMetadata(IngestError):
    """A metadata field required by the command is absent."""

    exit_code = 4


class BadRange(IngestError):
    """Domain end does not lie beyond the recorded volumes."""

    exit_code = 5


@dataclass(frozen=True, eq=False)
class RawHistogram:
    """Recorded (volume, count) pairs with dataset metadata.

    Attributes:
        volumes: Strictly increasing volumes (μm³)
        counts: Nonnegative counts, proportional to the density
        meta: Dataset metadata
    """

    volumes: np.ndarray
    counts: np.ndarray
    meta: DatasetMeta = field(default_factory=DatasetMeta)

    def __post_init__(self) -> None:
        volumes = np.array(self.volumes, dtype=float)
        counts = np.array(self.counts, dtype=float)
        object.__setattr__(self, "volumes", volumes)
        object.__setattr__(self, "counts", counts)

        if volumes.shape != counts.shape or volumes.ndim != 1:
            raise ParseError(f"{volumes.size} volumes for {counts.size} counts")
        if volumes.size < MIN_HISTOGRAM_POINTS:
            raise ParseError(
                f"Histogram needs at least {MIN_HISTOGRAM_POINTS} points, got {volumes.size}"
            )
        if np.any(np.diff(volumes) <= 0):
            bad = int(np.argmax(np.diff(volumes) <= 0)) + 1
            raise NonMonotoneVolumes(
                f"Volumes must increase strictly: {volumes[bad]} follows {volumes[bad - 1]}"
            )

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.volumes.tolist(), self.counts.tolist()))

    def require_doubling_time(self) -> float:
        if self.meta.doubling_time is None:
            raise MissingMetadata("Histogram has no '# doubling_time_min=' metadata line")
        return self.meta.doubling_time


class NoiseKind(Enum):
    """Synthetic noise models."""

    MULTIPLICATIVE_UNIFORM = "multiplicative"
    ADDITIVE_GAUSSIAN = "additive"


@dataclass(frozen=True)
class NoiseSpec:
    """Noise injected into a clean profile.

    Attributes:
        epsilon: Relative L² noise level ε ≥ 0
        seed: Random generator seed
        kind: Noise model
    """

    epsilon: float
    seed: int = 0
    kind: NoiseKind = NoiseKind.MULTIPLICATIVE_UNIFORM

    def __post_init__(self) -> None:
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"Noise level must be nonnegative, got {self.epsilon}")


def _parse_metadata(text: str, line_number: int, fields: Dict[str, object]) -> None:
    if "=" not in text:
        return
    key, _, value = (part.strip() for part in text.partition("="))
    target = METADATA_KEYS.get(key)
    if target is None:
        logger.debug(f"Ignoring metadata key '{key}' on line {line_number}")
        return
    if target == "label":
        fields[target] = value
        return
    try:
        fields[target] = float(value)
    except ValueError:
        raise ParseError(f"Metadata '{key}' is not a number: {value!r}", line_number) from None


def _read_lines(source: Source) -> List[str]:
    if isinstance(source, (str, Path)):
        try:
            return Path(source).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise InputFileError(f"Cannot read {source}: {exc}") from exc
    return source.read().splitlines()


def parse_histogram(source: Source) -> RawHistogram:
    """Parse a histogram CSV from a path or an open text stream.

    Raises:
        InputFileError: If the file cannot be read
        ParseError: On malformed headers, rows or metadata (with the line number)
        NonMonotoneVolumes: If volumes do not increase strictly
    """
    metadata: Dict[str, object] = {}
    volumes: List[float] = []
    counts: List[float] = []
    header_seen = False

    for line_number, raw_line in enumerate(_read_lines(source), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            _parse_metadata(line[1:].strip(), line_number, metadata)
            continue

        row = [cell.strip() for cell in next(csv.reader([line]))]
        if not header_seen:
            if tuple(cell.lower() for cell in row) not in HEADERS:
                raise ParseError(f"Expected header 'volume,count' or 'x,N', got {line!r}", line_number)
            header_seen = True
            continue

        if len(row) != 2:
            raise ParseError(f"Expected 2 columns, got {len(row)}", line_number)
        try:
            volume, count = float(row[0]), float(row[1])
        except ValueError:
            raise ParseError(f"Non-numeric row {line!r}", line_number) from None
        if not (np.isfinite(volume) and np.isfinite(count)):
            raise ParseError(f"Non-finite value in row {line!r}", line_number)
        if volume < 0:
            raise ParseError(f"Negative volume {volume}", line_number)
        if count < 0:
            raise ParseError(f"Negative count {count}", line_number)
        if volumes and volume <= volumes[-1]:
            raise NonMonotoneVolumes(
                f"line {line_number}: volume {volume} does not exceed {volumes[-1]}"
            )
        volumes.append(volume)
        counts.append(count)

    if not header_seen:
        raise ParseError("No header line found")

    try:
        meta = DatasetMeta(**metadata)  # type: ignore[arg-type]
    except DivrateError as exc:
        raise ParseError(f"Invalid metadata: {exc}") from exc

    histogram = RawHistogram(volumes=np.array(volumes), counts=np.array(counts), meta=meta)
    logger.debug(f"Parsed histogram with {len(volumes)} points, metadata {metadata}")
    return histogram


def complete_boundaries(histogram: RawHistogram, x_max: float) -> RawHistogram:
    """Add the zero boundary knots at 0 and x_max.

    A zero knot is also inserted one median spacing past the last datum
    when that still lies inside the domain.

    Raises:
        BadRange: If x_max does not exceed the largest recorded volume
    """
    volumes = histogram.volumes.tolist()
    counts = histogram.counts.tolist()
    if not x_max > volumes[-1]:
        raise BadRange(f"x_max={x_max} must exceed the largest recorded volume {volumes[-1]}")

    spacing = float(np.median(np.diff(histogram.volumes)))
    if volumes[0] == 0.0:
        if counts[0] != 0.0:
            logger.warning(f"Zeroing recorded count {counts[0]} at volume 0")
            counts[0] = 0.0
    else:
        volumes.insert(0, 0.0)
        counts.insert(0, 0.0)

    tail_knot = volumes[-1] + spacing
    if tail_knot < x_max:
        volumes.append(tail_knot)
        counts.append(0.0)
    volumes.append(float(x_max))
    counts.append(0.0)

    return RawHistogram(volumes=np.array(volumes), counts=np.array(counts), meta=histogram.meta)


def spline_samples(histogram: RawHistogram, grid: UniformGrid) -> Tuple[np.ndarray, int]:
    """Natural cubic spline of the knots at the grid nodes, negatives clamped.

    Returns:
        Tuple of (samples, number of clamped nodes)

    Raises:
        GridMismatch: If the grid does not cover the knot range
    """
    first, last = float(histogram.volumes[0]), float(histogram.volumes[-1])
    if first != 0.0:
        raise GridMismatch(f"Knots start at {first}; complete the boundaries first")
    if grid.x_max < last * (1.0 - 1e-12):
        raise GridMismatch(f"Grid ends at {grid.x_max}, knots extend to {last}")

    spline = CubicSpline(histogram.volumes, histogram.counts, bc_type="natural")
    nodes = grid.nodes
    values = spline(np.minimum(nodes, last))
    values[nodes > last] = 0.0

    negative = values < 0
    clamped = int(np.count_nonzero(negative))
    values[negative] = 0.0
    values[0] = 0.0
    return values, clamped


def to_uniform_density(histogram: RawHistogram, grid: UniformGrid) -> SizeDensity:
    """Interpolate completed knots onto the grid and normalize to unit mass.

    Raises:
        GridMismatch: If the grid does not cover the knot range
        DegenerateDensity: If the interpolant has no mass
    """
    values, clamped = spline_samples(histogram, grid)
    if clamped:
        logger.info(f"Clamped negative spline values at {clamped} nodes")
    return SizeDensity.from_values(grid, values, normalize=True)


def _l2(values: np.ndarray, dx: float) -> float:
    return float(np.sqrt(trapezoid(values * values, dx=dx)))


def add_noise(density: SizeDensity, spec: NoiseSpec) -> SizeDensity:
    """Perturb a profile at relative level ε, deterministically in the seed.

    Multiplicative: N_i(1 + εu_i), u_i uniform on [−1, 1].
    Additive: N_i + ε‖N‖₂ z_i / √(n·dx), z_i standard normal.
    The result is clamped to ≥ 0, zeroed at the origin and renormalized.
    """
    if spec.epsilon == 0:
        return density

    grid = density.grid
    values = np.asarray(density.values)
    rng = np.random.default_rng(spec.seed)

    if spec.kind is NoiseKind.MULTIPLICATIVE_UNIFORM:
        noisy = values * (1.0 + spec.epsilon * rng.uniform(-1.0, 1.0, size=values.size))
    else:
        scale = spec.epsilon * _l2(values, grid.dx) / np.sqrt(grid.n_points * grid.dx)
        noisy = values + scale * rng.standard_normal(values.size)

    result = SizeDensity.from_values(grid, noisy, normalize=True)
    logger.debug(
        f"Added {spec.kind.value} noise ε={spec.epsilon:g} (seed {spec.seed}): "
        f"realized relative L² {realized_noise(density, result):.4g}"
    )
    return result


def realized_noise(clean: SizeDensity, noisy: SizeDensity) -> float:
    """Relative L² distance ‖N_ε − N‖ / ‖N‖."""
    clean.grid.require_same(noisy.grid)
    dx = clean.grid.dx
    reference = _l2(np.asarray(clean.values), dx)
    return _l2(np.asarray(noisy.values) - clean.values, dx) / reference


def resample(density: SizeDensity, grid: UniformGrid) -> SizeDensity:
    """Linear interpolation of a profile onto another grid, zero beyond its end."""
    values = np.interp(grid.nodes, density.grid.nodes, density.values, right=0.0)
    return SizeDensity.from_values(grid, values, normalize=True)


def default_x_max(histogram: RawHistogram) -> float:
    """4·V_b when the mean volume is known, else 1.5× the largest recorded volume."""
    if histogram.meta.mean_volume is not None:
        x_max = MEAN_VOLUME_SPAN * histogram.meta.mean_volume
        if x_max > histogram.volumes[-1]:
            return x_max
        logger.warning(
            f"4·V_b={x_max:g} does not cover the data (max volume {histogram.volumes[-1]:g}); "
            f"falling back to {MAX_VOLUME_SPAN}× the largest volume"
        )
    return MAX_VOLUME_SPAN * float(histogram.volumes[-1])


def default_grid(x_max: float, n_points: int = DEFAULT_N_POINTS) -> UniformGrid:
    return UniformGrid.spanning(x_max, n_points)
