"""Domain types, quadrature and scalar quantities of the division model."""

from divrate.model.errors import DegenerateDensity, DivrateError, GridMismatch, InvalidProfile
from divrate.model.quantities import (
    growth_constant_from_doubling,
    l1_distance,
    malthus_from_density,
    malthus_from_doubling,
    malthus_regularized,
    moment,
    trapezoid_moment,
    volume_sigma,
)
from divrate.model.types import (
    DatasetMeta,
    DivisionRate,
    EigenPair,
    GrowthKind,
    GrowthLaw,
    SizeDensity,
    TransientState,
    UniformGrid,
)


__all__ = [
    "DatasetMeta",
    "DegenerateDensity",
    "DivisionRate",
    "DivrateError",
    "EigenPair",
    "GridMismatch",
    "GrowthKind",
    "GrowthLaw",
    "InvalidProfile",
    "SizeDensity",
    "TransientState",
    "UniformGrid",
    "growth_constant_from_doubling",
    "l1_distance",
    "malthus_from_density",
    "malthus_from_doubling",
    "malthus_regularized",
    "moment",
    "trapezoid_moment",
    "volume_sigma",
]
