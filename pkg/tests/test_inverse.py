"""Tests for the dilation operators and the four reconstruction methods."""

import numpy as np
import pytest

from divrate.ingest.histogram import NoiseSpec, add_noise
from divrate.inverse import (
    DEFAULT_FILTER_WIDTH,
    ExactReconstructor,
    FilteringReconstructor,
    HybridReconstructor,
    NonPositiveAlpha,
    QuasiReversibilityReconstructor,
    ReconstructionMethod,
    create_reconstructor,
    filter_regularize,
    hybrid,
    make_mollifier,
    quasi_reversibility,
    rhs_L,
    solve_dilation,
)
from divrate.inverse.base import support_width
from divrate.inverse.filtering import smooth_density
from divrate.inverse.mollifier import bump_constant, convolve
from divrate.inverse.operators import dilation, dilation_product, floor_mask, rate_from_product
from divrate.inverse.quasi_reversibility import half_point_values
from divrate.model import DivisionRate, GridMismatch, GrowthLaw, SizeDensity, UniformGrid
from divrate.model.quantities import malthus_regularized
from divrate.regselect import rate_error


def exact(density: SizeDensity, growth: GrowthLaw):
    return ExactReconstructor(growth).reconstruct(density)


# Operators


def test_dilation_maps_node_2i_to_i():
    values = np.arange(9, dtype=float)
    np.testing.assert_array_equal(dilation(values), [0, 8, 16, 24, 32, 0, 0, 0, 0])


def test_dilation_product_solves_recursion_exactly():
    rng = np.random.default_rng(3)
    forcing = rng.normal(size=257)
    product = dilation_product(forcing)
    np.testing.assert_allclose(dilation(product) - product, forcing, atol=1e-9)
    assert product[0] == pytest.approx(forcing[0] / 3.0)


def test_floor_mask_and_rate():
    grid = UniformGrid.spanning(4.0, 9)
    density = SizeDensity.from_values(grid, [0, 1e-5, 0.5, 1, 0.5, 1e-4, 0, 0, 0], normalize=False)
    mask = floor_mask(np.asarray(density.values))
    np.testing.assert_array_equal(mask, [False, False, True, True, True, False, False, False, False])
    raw, floored = rate_from_product(np.full(9, 2.0), density)
    assert floored == 6
    np.testing.assert_allclose(raw[2:5], [4.0, 2.0, 4.0])
    assert raw[1] == 0.0


def test_rhs_matches_analytic_derivative():
    grid = UniformGrid.spanning(6.0, 601)
    x = grid.nodes
    bump = np.exp(-((x - 3.0) ** 2) / 0.5)
    density = SizeDensity.from_values(grid, bump, normalize=False)
    kappa, malthus = 0.7, 0.4
    values = np.asarray(density.values)
    derivative = -4.0 * (x - 3.0) * values
    expected = kappa * (values + x * derivative) + malthus * values
    forcing = rhs_L(density, malthus, GrowthLaw.exponential(kappa))
    assert np.max(np.abs(forcing - expected)) < 10 * grid.dx**2


def test_rhs_of_unit_profile_matches_division_term(unit_pair, growth):
    density = unit_pair.density
    forcing = rhs_L(density, unit_pair.malthus, growth)
    values = np.asarray(density.values)
    defect = forcing - (dilation(values) - values)
    assert np.sqrt(np.sum(defect**2) * density.grid.dx) < 10 * density.grid.dx


def test_solve_dilation_rejects_wrong_length(unit_pair):
    with pytest.raises(GridMismatch):
        solve_dilation(np.zeros(10), unit_pair.density)


# Exact solve


def test_exact_solve_satisfies_dilation_identity(unit_pair, growth):
    result = exact(unit_pair.density, growth)
    assert result.method is ReconstructionMethod.EXACT
    assert result.alpha == 0.0
    assert result.residual < 1e-9


def test_exact_matches_solve_dilation(unit_pair, growth):
    result = exact(unit_pair.density, growth)
    forcing = rhs_L(unit_pair.density, result.lambda_used, growth)
    rate = solve_dilation(forcing, unit_pair.density)
    np.testing.assert_allclose(rate.values, result.rate.values)


def test_exact_solve_is_scale_equivariant(unit_pair, growth):
    base = exact(unit_pair.density, growth)
    scaled = exact(unit_pair.density.scaled(4.0), growth)
    np.testing.assert_allclose(scaled.rate.values, base.rate.values, rtol=1e-10, atol=1e-12)


@pytest.mark.slow
def test_exact_recovers_unit_rate(fine_unit_pair, growth):
    density = fine_unit_pair.density
    result = exact(density, growth)
    truth = DivisionRate.constant(density.grid, 1.0)
    assert rate_error(result.rate, truth, density) < 0.05
    product_mass = float(np.sum(np.asarray(result.rate.values) * density.values) * density.grid.dx)
    assert result.diagnostics.clamped_mass < 0.05 * product_mass


@pytest.mark.slow
def test_exact_recovers_bump_rate(fine_bump_pair, fine_bump, growth):
    density = fine_bump_pair.density
    result = exact(density, growth)
    assert rate_error(result.rate, fine_bump, density) < 0.05
    product_mass = float(np.sum(np.asarray(result.rate.values) * density.values) * density.grid.dx)
    assert result.diagnostics.clamped_mass < 0.05 * product_mass


# Quasi-reversibility


def test_half_point_values_of_linear_data():
    np.testing.assert_allclose(half_point_values(2.0 * np.arange(9)), np.arange(9))


def test_qr_rejects_nonpositive_alpha(unit_pair, growth):
    for alpha in (0.0, -1.0, float("nan")):
        with pytest.raises(NonPositiveAlpha):
            quasi_reversibility(unit_pair.density, alpha, growth)


def test_qr_uses_regularized_malthus(unit_pair, growth):
    result = quasi_reversibility(unit_pair.density, 0.2, growth)
    assert result.lambda_used == pytest.approx(malthus_regularized(unit_pair.density, 0.2, growth))
    override = quasi_reversibility(unit_pair.density, 0.2, growth, lambda_override=0.9)
    assert override.lambda_used == 0.9


def test_qr_is_scale_equivariant(unit_pair, growth):
    base = quasi_reversibility(unit_pair.density, 0.1, growth)
    scaled = quasi_reversibility(unit_pair.density.scaled(8.0), 0.1, growth)
    np.testing.assert_allclose(scaled.rate.values, base.rate.values, rtol=1e-10, atol=1e-12)


@pytest.mark.slow
def test_qr_small_alpha_matches_exact(fine_unit_pair, growth):
    density = fine_unit_pair.density
    reference = exact(density, growth)
    result = quasi_reversibility(density, 1e-3, growth)
    assert rate_error(result.rate, reference.rate, density) < 0.05


def test_qr_bias_shrinks_with_alpha(unit_pair, growth):
    density = unit_pair.density
    reference = exact(density, growth)
    errors = [
        rate_error(quasi_reversibility(density, alpha, growth).rate, reference.rate, density)
        for alpha in (0.4, 0.2, 0.1, 0.05)
    ]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_qr_is_stabler_than_exact_under_noise(unit_pair, growth):
    clean = unit_pair.density
    noisy = add_noise(clean, NoiseSpec(epsilon=2e-2, seed=1))

    exact_shift = rate_error(exact(noisy, growth).rate, exact(clean, growth).rate, clean)
    qr_clean = quasi_reversibility(clean, 1.0, growth)
    qr_noisy = quasi_reversibility(noisy, 1.0, growth)
    qr_shift = rate_error(qr_noisy.rate, qr_clean.rate, clean)
    assert qr_shift < exact_shift


# Mollifier and filtering


@pytest.mark.parametrize("alpha", [1e-4, 0.1, 1.0])
def test_mollifier_has_unit_mass(alpha):
    assert make_mollifier(alpha).mass() == pytest.approx(1.0, abs=1e-8)


def test_mollifier_support():
    mollifier = make_mollifier(0.5)
    x = np.array([-0.1, 0.0, 0.5, 0.7])
    np.testing.assert_array_equal(mollifier(x), 0.0)
    assert mollifier(np.array([0.25]))[0] == pytest.approx(bump_constant() * np.exp(-4.0) / 0.5)


def test_mollifier_rejects_nonpositive_width():
    with pytest.raises(NonPositiveAlpha):
        make_mollifier(0.0)


def test_mollifier_weights_on_linear_data():
    grid = UniformGrid.spanning(4.0, 401)
    alpha = 0.3
    smooth, derivative, offset = make_mollifier(alpha).weights(grid)
    assert np.sum(smooth) == pytest.approx(1.0)
    assert np.sum(derivative) == pytest.approx(0.0, abs=1e-8)

    x = grid.nodes
    inside = (x >= alpha / 2 + grid.dx) & (x <= grid.x_max - alpha / 2 - grid.dx)
    np.testing.assert_allclose(convolve(x, smooth, offset)[inside], x[inside], atol=1e-8)
    np.testing.assert_allclose(convolve(x, derivative, offset)[inside], 1.0, atol=1e-6)


def test_mollifier_weights_are_centered():
    grid = UniformGrid.spanning(4.0, 401)
    smooth, derivative, offset = make_mollifier(0.3).weights(grid)
    assert offset < 0
    np.testing.assert_allclose(smooth, smooth[::-1], atol=1e-12)
    np.testing.assert_allclose(derivative, -derivative[::-1], atol=1e-8)
    assert smooth.size + 2 * offset == 1


def test_narrowest_kernel_derivative_is_central_difference():
    grid = UniformGrid.spanning(4.0, 401)
    _, derivative, offset = make_mollifier(2 * grid.dx).weights(grid)
    assert offset == -1
    np.testing.assert_allclose(derivative * grid.dx, [0.5, 0.0, -0.5], atol=1e-8)


def test_mollifier_converges_as_width_shrinks(unit_pair, growth):
    density = unit_pair.density
    values = np.asarray(density.values)
    distances = []
    for alpha in (0.1, 0.05, 0.025):
        smoothed = smooth_density(density, alpha, growth)[1]
        distances.append(float(np.sqrt(np.sum((smoothed - values) ** 2) * density.grid.dx)))
    assert all(later < earlier for earlier, later in zip(distances, distances[1:]))


def test_filtering_records_width_and_uses_regularized_malthus(unit_pair, growth):
    result = filter_regularize(unit_pair.density, 0.1, growth)
    assert result.method is ReconstructionMethod.FILTERING
    assert result.diagnostics.filter_width == 0.1
    assert not result.diagnostics.oversmoothed
    assert result.lambda_used == pytest.approx(malthus_regularized(unit_pair.density, 0.1, growth))
    assert result.lambda_used < malthus_regularized(unit_pair.density, 0.0, growth)
    override = filter_regularize(unit_pair.density, 0.1, growth, lambda_override=0.9)
    assert override.lambda_used == 0.9


@pytest.mark.slow
def test_filtering_narrow_kernel_matches_exact(fine_unit_pair, growth):
    density = fine_unit_pair.density
    reference = exact(density, growth)
    result = filter_regularize(density, 2 * density.grid.dx, growth)
    assert rate_error(result.rate, reference.rate, density) < 0.05


@pytest.mark.slow
def test_filtering_narrow_kernel_matches_exact_on_bump(fine_bump_pair, growth):
    density = fine_bump_pair.density
    reference = exact(density, growth)
    result = filter_regularize(density, 2 * density.grid.dx, growth)
    assert rate_error(result.rate, reference.rate, density) < 0.05


@pytest.mark.slow
def test_filtering_error_scales_like_root_noise(fine_unit_pair, growth):
    density = fine_unit_pair.density
    truth = DivisionRate.constant(density.grid, 1.0)
    errors = []
    for epsilon in (1e-2, 1e-3, 1e-4):
        alpha = 2.0 * np.sqrt(epsilon)
        runs = [
            rate_error(
                filter_regularize(add_noise(density, NoiseSpec(epsilon, seed)), alpha, growth).rate,
                truth,
                density,
            )
            for seed in range(20)
        ]
        errors.append(float(np.median(runs)))
    for coarse, fine in zip(errors, errors[1:]):
        assert np.sqrt(10) / 2 <= coarse / fine <= 2 * np.sqrt(10)


def test_filtering_is_stabler_than_exact_under_noise(unit_pair, growth):
    clean = unit_pair.density
    noisy = add_noise(clean, NoiseSpec(epsilon=2e-2, seed=1))

    exact_shift = rate_error(exact(noisy, growth).rate, exact(clean, growth).rate, clean)
    filtered_shift = rate_error(
        filter_regularize(noisy, 0.5, growth).rate, filter_regularize(clean, 0.5, growth).rate, clean
    )
    assert filtered_shift < exact_shift


def test_filtering_flags_oversmoothing(growth):
    grid = UniformGrid.spanning(4.0, 65)
    values = np.zeros(65)
    values[10:15] = [0.5, 1.0, 1.5, 1.0, 0.5]
    density = SizeDensity.from_values(grid, values)
    result = filter_regularize(density, 1.0, growth)
    assert result.diagnostics.oversmoothed


def test_support_width_ignores_negligible_tails():
    grid = UniformGrid.spanning(4.0, 65)
    values = np.full(65, 1e-8)
    values[0] = 0.0
    values[10:15] = [0.5, 1.0, 1.5, 1.0, 0.5]
    density = SizeDensity.from_values(grid, values)
    assert support_width(density) == pytest.approx(4 * grid.dx)


def test_filtering_flags_widths_beyond_significant_support(unit_pair, growth):
    density = unit_pair.density
    width = support_width(density)
    assert width < 0.5 * density.grid.x_max
    assert filter_regularize(density, 1.5 * width, growth).diagnostics.oversmoothed
    assert not filter_regularize(density, 0.2 * width, growth).diagnostics.oversmoothed


# Hybrid and factory


def test_hybrid_with_negligible_filter_matches_qr(unit_pair, growth):
    density = unit_pair.density
    reference = quasi_reversibility(density, 0.1, growth)
    result = hybrid(density, 1e-4, 0.1, growth)
    assert result.method is ReconstructionMethod.HYBRID
    assert result.alpha == 0.1
    assert result.diagnostics.filter_width == 1e-4
    assert rate_error(result.rate, reference.rate, density) < 0.02


def test_hybrid_with_negligible_march_matches_filtering(unit_pair, growth):
    density = unit_pair.density
    malthus = unit_pair.malthus
    reference = filter_regularize(density, 0.1, growth, lambda_override=malthus)
    result = hybrid(density, 0.1, 1e-6, growth, lambda_override=malthus)
    assert rate_error(result.rate, reference.rate, density) < 0.05


def test_hybrid_rejects_nonpositive_widths(unit_pair, growth):
    with pytest.raises(NonPositiveAlpha):
        hybrid(unit_pair.density, 0.0, 0.1, growth)
    with pytest.raises(NonPositiveAlpha):
        hybrid(unit_pair.density, 0.1, -0.1, growth)


@pytest.mark.parametrize(
    "name, cls",
    [
        ("exact", ExactReconstructor),
        ("qr", QuasiReversibilityReconstructor),
        ("filter", FilteringReconstructor),
        ("hybrid", HybridReconstructor),
    ],
)
def test_factory_creates_each_method(name, cls, growth):
    reconstructor = create_reconstructor(name, growth)
    assert isinstance(reconstructor, cls)
    assert reconstructor.method is ReconstructionMethod(name)


def test_factory_hybrid_width(growth):
    assert create_reconstructor("hybrid", growth).filter_width == DEFAULT_FILTER_WIDTH
    assert create_reconstructor("hybrid", growth, filter_width=0.2).filter_width == 0.2


def test_factory_rejects_unknown_method(growth):
    with pytest.raises(ValueError, match="Unknown reconstruction method"):
        create_reconstructor("tikhonov", growth)


def test_diagnostics_as_dict(unit_pair, growth):
    values = filter_regularize(unit_pair.density, 0.1, growth).diagnostics.as_dict()
    assert set(values) == {"clamp_count", "clamped_mass", "floor_count", "oversmoothed", "filter_width"}
