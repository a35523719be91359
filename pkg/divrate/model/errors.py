#!/usr/bin/env python3
"""Exception base for divrate.

Every domain error carries the process exit code the CLI maps it to.
"""


class DivrateError(Exception):
    """Base exception for all divrate errors."""

    exit_code: int = 1


class InvalidProfile(DivrateError):
    """A grid or sampled profile violates its construction invariants."""

    exit_code = 5


class GridMismatch(DivrateError):
    """Two profiles that must share a grid do not."""

    exit_code = 5


class DegenerateDensity(DivrateError):
    """A density has no usable mass (zero or negative moments)."""

    exit_code = 6
