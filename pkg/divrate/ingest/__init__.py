"""Measured data: histogram ingestion, synthetic noise and CSV artifacts."""

from divrate.ingest.files import (
    read_density_csv,
    read_rate_csv,
    read_result_csv,
    write_density_csv,
    write_histogram_csv,
    write_rate_csv,
    write_result_csv,
    write_sweep_csv,
    write_trajectory_csv,
)
from divrate.ingest.histogram import (
    DEFAULT_N_POINTS,
    BadRange,
    IngestError,
    InputFileError,
    MissingMetadata,
    NoiseKind,
    NoiseSpec,
    NonMonotoneVolumes,
    ParseError,
    RawHistogram,
    add_noise,
    complete_boundaries,
    default_grid,
    default_x_max,
    parse_histogram,
    realized_noise,
    resample,
    to_uniform_density,
)


__all__ = [
    "DEFAULT_N_POINTS",
    "BadRange",
    "IngestError",
    "InputFileError",
    "MissingMetadata",
    "NoiseKind",
    "NoiseSpec",
    "NonMonotoneVolumes",
    "ParseError",
    "RawHistogram",
    "add_noise",
    "complete_boundaries",
    "default_grid",
    "default_x_max",
    "parse_histogram",
    "read_density_csv",
    "read_rate_csv",
    "read_result_csv",
    "realized_noise",
    "resample",
    "to_uniform_density",
    "write_density_csv",
    "write_histogram_csv",
    "write_rate_csv",
    "write_result_csv",
    "write_sweep_csv",
    "write_trajectory_csv",
]
