"""divrate - division rate calibration for size-structured cell populations."""

try:
    from divrate._version import __version__
except ImportError:
    __version__ = "0.0.0+unknown"

from divrate.core import CalibrationPipeline
from divrate.config import RunConfig
from divrate.persistence import RunLedger


__all__ = [
    "CalibrationPipeline",
    "RunConfig",
    "RunLedger",
    "__version__",
]
