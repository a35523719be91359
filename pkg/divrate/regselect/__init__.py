"""Residuals, α sweeps and regularization-parameter selection."""

from divrate.regselect.residual import rate_error, residual, solution_norm
from divrate.regselect.selection import TooFewPoints, select_alpha_lcurve, select_alpha_ratio
from divrate.regselect.sweep import AlphaSweep, EmptySweep, default_workers, sweep_alpha


__all__ = [
    "AlphaSweep",
    "EmptySweep",
    "TooFewPoints",
    "default_workers",
    "rate_error",
    "residual",
    "select_alpha_ratio",
    "select_alpha_lcurve",
    "solution_norm",
    "sweep_alpha",
]
