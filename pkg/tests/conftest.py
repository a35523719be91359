"""Shared fixtures: steady profiles of known division rates."""

import pytest

from divrate.core.datasets import bump_rate, sample_rate
from divrate.forward.solver import SolverConfig, eigenpair_solve
from divrate.model.types import DivisionRate, EigenPair, GrowthLaw, UniformGrid


X_MAX = 12.0
N_POINTS = 385
FINE_N_POINTS = 12289  # dx = 2⁻¹⁰


@pytest.fixture(scope="session")
def grid() -> UniformGrid:
    return UniformGrid.spanning(X_MAX, N_POINTS)


@pytest.fixture(scope="session")
def growth() -> GrowthLaw:
    return GrowthLaw.linear(1.0)


@pytest.fixture(scope="session")
def unit_rate(grid: UniformGrid) -> DivisionRate:
    return DivisionRate.constant(grid, 1.0)


@pytest.fixture(scope="session")
def bump(grid: UniformGrid) -> DivisionRate:
    return sample_rate(bump_rate, grid)


@pytest.fixture(scope="session")
def unit_pair(unit_rate: DivisionRate, growth: GrowthLaw) -> EigenPair:
    """Steady profile of B ≡ 1 with unit linear growth, where λ0 = 1."""
    config = SolverConfig.for_problem(unit_rate.grid, growth)
    return eigenpair_solve(unit_rate, growth, config)


@pytest.fixture(scope="session")
def bump_pair(bump: DivisionRate, growth: GrowthLaw) -> EigenPair:
    config = SolverConfig.for_problem(bump.grid, growth)
    return eigenpair_solve(bump, growth, config)


@pytest.fixture(scope="session")
def fine_grid() -> UniformGrid:
    return UniformGrid.spanning(X_MAX, FINE_N_POINTS)


@pytest.fixture(scope="session")
def fine_unit_pair(fine_grid: UniformGrid, growth: GrowthLaw) -> EigenPair:
    rate = DivisionRate.constant(fine_grid, 1.0)
    return eigenpair_solve(rate, growth, SolverConfig.for_problem(fine_grid, growth))


@pytest.fixture(scope="session")
def fine_bump(fine_grid: UniformGrid) -> DivisionRate:
    return sample_rate(bump_rate, fine_grid)


@pytest.fixture(scope="session")
def fine_bump_pair(fine_bump: DivisionRate, growth: GrowthLaw) -> EigenPair:
    return eigenpair_solve(fine_bump, growth, SolverConfig.for_problem(fine_bump.grid, growth))
