"""Tests for grids, profiles and scalar model quantities."""

import math

import numpy as np
import pytest

from divrate.model import (
    DatasetMeta,
    DegenerateDensity,
    DivisionRate,
    EigenPair,
    GridMismatch,
    GrowthKind,
    GrowthLaw,
    InvalidProfile,
    SizeDensity,
    UniformGrid,
    growth_constant_from_doubling,
    l1_distance,
    malthus_from_density,
    malthus_from_doubling,
    malthus_regularized,
    moment,
    volume_sigma,
)


def triangle(grid: UniformGrid) -> SizeDensity:
    x = grid.nodes
    return SizeDensity.from_values(grid, np.maximum(0.0, 1.0 - np.abs(x - 2.0)))


def test_grid_nodes_start_at_origin():
    grid = UniformGrid.spanning(4.0, 9)
    assert grid.dx == pytest.approx(0.5)
    assert grid.nodes[0] == 0.0
    assert grid.x_max == pytest.approx(4.0)


@pytest.mark.parametrize("dx, n_points", [(0.0, 10), (-1.0, 10), (0.1, 3), (float("nan"), 10)])
def test_grid_rejects_invalid_sizes(dx, n_points):
    with pytest.raises(InvalidProfile):
        UniformGrid(dx=dx, n_points=n_points)


def test_grid_mismatch_is_detected():
    with pytest.raises(GridMismatch):
        UniformGrid.spanning(4.0, 9).require_same(UniformGrid.spanning(4.0, 17))


def test_density_invariants():
    grid = UniformGrid.spanning(4.0, 9)
    with pytest.raises(InvalidProfile):
        SizeDensity(grid=grid, values=np.ones(9))
    values = np.linspace(0.0, 1.0, 9)
    values[3] = -0.1
    with pytest.raises(InvalidProfile):
        SizeDensity(grid=grid, values=values)
    with pytest.raises(InvalidProfile):
        SizeDensity(grid=grid, values=np.zeros(8))
    with pytest.raises(InvalidProfile):
        SizeDensity(grid=grid, values=np.linspace(0.0, 1.0, 9), normalized=True)


def test_from_values_clamps_and_normalizes():
    grid = UniformGrid.spanning(4.0, 9)
    raw = np.array([3.0, 1.0, -2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0])
    density = SizeDensity.from_values(grid, raw)
    assert density.normalized
    assert density.values[0] == 0.0
    assert density.values[2] == 0.0
    assert moment(density, 0) == pytest.approx(1.0, rel=1e-12)


def test_from_values_rejects_massless_profile():
    with pytest.raises(DegenerateDensity):
        SizeDensity.from_values(UniformGrid.spanning(4.0, 9), np.zeros(9))


def test_density_samples_are_read_only():
    density = triangle(UniformGrid.spanning(4.0, 9))
    with pytest.raises(ValueError):
        density.values[1] = 5.0


def test_rate_must_be_nonnegative():
    grid = UniformGrid.spanning(4.0, 9)
    with pytest.raises(InvalidProfile):
        DivisionRate(grid=grid, values=-np.ones(9))
    assert DivisionRate(grid=grid, values=np.zeros(9)).is_zero()
    assert not DivisionRate.constant(grid, 2.0).is_zero()


def test_growth_speeds():
    grid = UniformGrid.spanning(4.0, 9)
    linear = GrowthLaw.linear(2.0)
    exponential = GrowthLaw.exponential(0.5)
    assert linear.kind is GrowthKind.LINEAR
    np.testing.assert_allclose(linear.speed(grid), 2.0)
    np.testing.assert_allclose(exponential.speed(grid), 0.5 * grid.nodes)
    assert exponential.max_speed(grid) == pytest.approx(2.0)
    with pytest.raises(InvalidProfile):
        GrowthLaw.linear(0.0)


def test_moments_of_a_triangle():
    density = triangle(UniformGrid.spanning(4.0, 401))
    assert moment(density, 0) == pytest.approx(1.0)
    assert moment(density, 1) == pytest.approx(2.0, rel=1e-6)


def test_malthus_from_density():
    density = triangle(UniformGrid.spanning(4.0, 401))
    assert malthus_from_density(density, GrowthLaw.linear(3.0)) == pytest.approx(1.5, rel=1e-6)
    assert malthus_from_density(density, GrowthLaw.exponential(0.7)) == pytest.approx(0.7)


def test_malthus_regularized_reduces_to_moment_identity():
    density = triangle(UniformGrid.spanning(4.0, 401))
    growth = GrowthLaw.linear(1.0)
    assert malthus_regularized(density, 0.0, growth) == pytest.approx(
        malthus_from_density(density, growth)
    )
    expected = 1.0 / (moment(density, 1) + 0.25 * 0.4)
    assert malthus_regularized(density, 0.4) == pytest.approx(expected)
    with pytest.raises(ValueError):
        malthus_regularized(density, -0.1)


def test_malthus_regularized_decreases_in_alpha():
    density = triangle(UniformGrid.spanning(4.0, 401))
    values = [malthus_regularized(density, alpha) for alpha in (0.0, 0.05, 0.2, 1.0, 10.0)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    assert 1e6 * malthus_regularized(density, 1e6) == pytest.approx(4.0, rel=1e-4)


def test_doubling_time_conversions():
    assert malthus_from_doubling(20.0) == pytest.approx(math.log(2.0) / 20.0)
    assert malthus_from_doubling(20.0) == pytest.approx(0.0346574, abs=1e-6)
    assert malthus_from_doubling(54.0) == pytest.approx(0.0128353, abs=1e-6)
    density = triangle(UniformGrid.spanning(4.0, 401))
    meta = DatasetMeta(doubling_time=20.0)

    lambda0, growth = growth_constant_from_doubling(meta, density)
    assert growth.kind is GrowthKind.LINEAR
    assert growth.coefficient == pytest.approx(lambda0 * 2.0, rel=1e-6)

    lambda0, growth = growth_constant_from_doubling(meta, density, exponential=True)
    assert growth.kind is GrowthKind.EXPONENTIAL
    assert growth.coefficient == pytest.approx(lambda0)

    with pytest.raises(ValueError):
        growth_constant_from_doubling(DatasetMeta(), density)


def test_volume_sigma():
    assert volume_sigma(0.0) == 0.0
    assert volume_sigma(1.0) == pytest.approx(math.pi / 6.0 * math.sqrt(15.0))
    assert volume_sigma(0.1) == pytest.approx(volume_sigma(1.0) * 1e-3)
    assert 5e-5 <= volume_sigma(0.03) <= 1.5e-4


def test_l1_distance():
    grid = UniformGrid.spanning(4.0, 401)
    density = triangle(grid)
    assert l1_distance(density, density) == 0.0
    doubled = density.scaled(2.0)
    assert l1_distance(density, doubled) == pytest.approx(1.0)
    with pytest.raises(GridMismatch):
        l1_distance(density, triangle(UniformGrid.spanning(4.0, 201)))


def test_metadata_validation():
    with pytest.raises(InvalidProfile):
        DatasetMeta(doubling_time=0.0)
    with pytest.raises(InvalidProfile):
        DatasetMeta(diameter_sigma=-1.0)


def test_eigenpair_requires_positive_malthus():
    density = triangle(UniformGrid.spanning(4.0, 401))
    with pytest.raises(DegenerateDensity):
        EigenPair(density=density, malthus=0.0, moment_malthus=0.0)
