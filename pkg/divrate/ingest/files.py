#!/usr/bin/env python3
"""CSV artifacts: profiles, rates, reconstructions, sweeps and trajectories.

Numbers are written with 17 significant digits so files re-read to the same
doubles. Metadata goes into `# key=value` comment lines; the files carry
no timestamps, so identical inputs give byte-identical files.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from divrate.forward.solver import Trajectory
from divrate.ingest.histogram import InputFileError, ParseError
from divrate.inverse.base import ReconstructionResult
from divrate.model.errors import GridMismatch
from divrate.model.types import DatasetMeta, DivisionRate, SizeDensity, UniformGrid
from divrate.regselect.sweep import AlphaSweep


logger = logging.getLogger(__name__)

# Constants
GRID_TOLERANCE = 1e-9

PathLike = Union[str, Path]
Row = Sequence[float]


def format_number(value: float) -> str:
    return f"{float(value):.17g}"


def format_metadata(key: str, value: object) -> str:
    if isinstance(value, float):
        value = format_number(value)
    return f"# {key}={value}"


def meta_lines(meta: DatasetMeta) -> List[str]:
    """Metadata comment lines understood by the histogram parser."""
    lines = []
    if meta.doubling_time is not None:
        lines.append(format_metadata("doubling_time_min", float(meta.doubling_time)))
    if meta.mean_volume is not None:
        lines.append(format_metadata("mean_volume", float(meta.mean_volume)))
    if meta.diameter_sigma:
        lines.append(format_metadata("sigma_um", float(meta.diameter_sigma)))
    if meta.label:
        lines.append(format_metadata("label", meta.label))
    return lines


def write_table(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Row],
    preamble: Sequence[str] = (),
    footer: Optional[Mapping[str, object]] = None,
) -> Path:
    """Write a numeric CSV table with optional comment lines before and after."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for line in preamble:
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(value) for value in row])
        for key, value in (footer or {}).items():
            handle.write(format_metadata(key, value) + "\n")
    logger.debug(f"Wrote {path}")
    return path


def read_table(path: PathLike, expected: Sequence[str]) -> Tuple[np.ndarray, Dict[str, str]]:
    """Read a numeric CSV table with the given header.

    Returns:
        Tuple of (rows × columns array, comment metadata)

    Raises:
        InputFileError: If the file cannot be read
        ParseError: On a header or row mismatch
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputFileError(f"Cannot read {path}: {exc}") from exc

    metadata: Dict[str, str] = {}
    rows: List[List[float]] = []
    header_seen = False
    wanted = [name.lower() for name in expected]

    for line_number, raw_line in enumerate(lines, start=1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
            continue
        cells = [cell.strip() for cell in next(csv.reader([line]))]
        if not header_seen:
            if [cell.lower() for cell in cells] != wanted:
                raise ParseError(f"Expected header {','.join(expected)!r}, got {line!r}", line_number)
            header_seen = True
            continue
        if len(cells) != len(expected):
            raise ParseError(f"Expected {len(expected)} columns, got {len(cells)}", line_number)
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError:
            raise ParseError(f"Non-numeric row {line!r}", line_number) from None

    if not header_seen:
        raise ParseError(f"No header line found in {path}")
    return np.array(rows, dtype=float).reshape(-1, len(expected)), metadata


def grid_from_nodes(nodes: np.ndarray) -> UniformGrid:
    """Recover the uniform grid of a sampled profile.

    Raises:
        GridMismatch: If the abscissae are not an origin-anchored uniform grid
    """
    if nodes.size < 2 or nodes[0] != 0.0:
        raise GridMismatch("Profile abscissae must start at 0 with at least two nodes")
    grid = UniformGrid.spanning(float(nodes[-1]), nodes.size)
    if np.max(np.abs(nodes - grid.nodes)) > GRID_TOLERANCE * grid.x_max:
        raise GridMismatch("Profile abscissae are not uniformly spaced")
    return grid


def write_density_csv(
    path: PathLike, density: SizeDensity, footer: Optional[Mapping[str, object]] = None
) -> Path:
    """Write a profile as `x,N`."""
    rows = zip(density.grid.nodes, density.values)
    return write_table(path, ("x", "N"), rows, footer=footer)


def read_density_csv(path: PathLike, normalize: bool = True) -> SizeDensity:
    table, _ = read_table(path, ("x", "N"))
    grid = grid_from_nodes(table[:, 0])
    return SizeDensity.from_values(grid, table[:, 1], normalize=normalize)


def write_rate_csv(
    path: PathLike, rate: DivisionRate, footer: Optional[Mapping[str, object]] = None
) -> Path:
    """Write a division rate as `x,B`."""
    return write_table(path, ("x", "B"), zip(rate.grid.nodes, rate.values), footer=footer)


def read_rate_csv(path: PathLike) -> DivisionRate:
    table, _ = read_table(path, ("x", "B"))
    grid = grid_from_nodes(table[:, 0])
    return DivisionRate(grid=grid, values=table[:, 1])


def write_result_csv(
    path: PathLike, result: ReconstructionResult, extra: Optional[Mapping[str, object]] = None
) -> Path:
    """Write a reconstruction as `x,B,N_used,H` with its scalars in the footer."""
    grid = result.rate.grid
    rows = zip(grid.nodes, result.rate.values, result.profile.values, result.product)
    footer: Dict[str, object] = {
        "lambda": result.lambda_used,
        "alpha": result.alpha,
        "residual": result.residual,
        "method": result.method.value,
    }
    if result.diagnostics.filter_width is not None:
        footer["filter_width"] = result.diagnostics.filter_width
    footer.update(extra or {})
    return write_table(path, ("x", "B", "N_used", "H"), rows, footer=footer)


def read_result_csv(path: PathLike) -> Tuple[DivisionRate, SizeDensity, Dict[str, str]]:
    """Read a reconstruction written by write_result_csv.

    Returns:
        Tuple of (rate, profile used by the solve, footer metadata)
    """
    table, metadata = read_table(path, ("x", "B", "N_used", "H"))
    grid = grid_from_nodes(table[:, 0])
    rate = DivisionRate(grid=grid, values=table[:, 1])
    profile = SizeDensity.from_values(grid, table[:, 2], normalize=False)
    return rate, profile, metadata


def write_sweep_csv(path: PathLike, sweep: AlphaSweep) -> Path:
    """Write a sweep as `alpha,residual,ratio,solution_norm`, one row per α."""
    rows = zip(sweep.alphas, sweep.residuals, sweep.ratios, sweep.solution_norms)
    footer: Dict[str, object] = {"method": sweep.method.value}
    for alpha, reason in sorted(sweep.failures.items()):
        footer[f"failed_alpha_{format_number(alpha)}"] = reason
    return write_table(path, ("alpha", "residual", "ratio", "solution_norm"), rows, footer=footer)


def write_trajectory_csv(path: PathLike, trajectory: Trajectory) -> Path:
    """Write recorded states in long format `t,x,n`."""
    nodes = trajectory.grid.nodes

    def rows() -> Iterable[Row]:
        for state in trajectory.states:
            for x, value in zip(nodes, state.density.values):
                yield (state.time, x, value)

    footer = {"clamped_mass": trajectory.clamped_mass}
    return write_table(path, ("t", "x", "n"), rows(), footer=footer)


def write_histogram_csv(
    path: PathLike, volumes: Sequence[float], counts: Sequence[float], meta: DatasetMeta
) -> Path:
    """Write a `volume,count` histogram with metadata lines first."""
    return write_table(path, ("volume", "count"), zip(volumes, counts), preamble=meta_lines(meta))
