"""Pipeline orchestration and synthetic dataset presets."""

from divrate.core.datasets import DATASETS, SyntheticDataset, bump_rate, get_dataset, plateau_rate
from divrate.core.orchestrator import CalibrationData, CalibrationPipeline, PipelineResult


__all__ = [
    "DATASETS",
    "CalibrationData",
    "CalibrationPipeline",
    "PipelineResult",
    "SyntheticDataset",
    "bump_rate",
    "get_dataset",
    "plateau_rate",
]
