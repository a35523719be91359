#!/usr/bin/env python3
"""Calibration pipeline.

Wires ingest, inversion, α selection and the forward solvers into the
commands of the CLI. Every command writes its artifacts into the output
directory and returns the scalar results it produced.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from divrate.config.config import Command, LambdaSource, RunConfig, SelectRule
from divrate.core.datasets import SyntheticDataset, bump_rate, constant_rate, sample_rate
from divrate.forward.solver import (
    SolverConfig,
    balance_residuals,
    convergence_distances,
    default_initial_profile,
    eigenpair_solve,
    transient_solve,
)
from divrate.ingest.files import (
    read_density_csv,
    read_rate_csv,
    read_result_csv,
    write_density_csv,
    write_histogram_csv,
    write_rate_csv,
    write_result_csv,
    write_sweep_csv,
    write_table,
    write_trajectory_csv,
)
from divrate.ingest.histogram import (
    NoiseKind,
    NoiseSpec,
    RawHistogram,
    add_noise,
    complete_boundaries,
    default_x_max,
    parse_histogram,
    realized_noise,
    resample,
    to_uniform_density,
)
from divrate.inverse.base import ReconstructionResult
from divrate.inverse.factory import create_reconstructor
from divrate.model.quantities import (
    growth_constant_from_doubling,
    l1_distance,
    malthus_from_density,
    malthus_from_doubling,
    moment,
    volume_sigma,
)
from divrate.model.types import (
    DatasetMeta,
    DivisionRate,
    GrowthKind,
    GrowthLaw,
    SizeDensity,
    UniformGrid,
)
from divrate.regselect.residual import rate_error
from divrate.regselect.selection import select_alpha_lcurve, select_alpha_ratio
from divrate.regselect.sweep import AlphaSweep, sweep_alpha


logger = logging.getLogger(__name__)

# Constants
SYNTHETIC_X_MAX = 12.0
DEFAULT_RATE = 1.0
CHANNEL_TAIL_FRACTION = 1e-4  # synth channels stop where N drops below this fraction of its peak
DATA_DENSITY_NAMES = ("N.csv", "N_noisy.csv")


@dataclass
class PipelineResult:
    """Outcome of one command.

    Attributes:
        command: Command that ran
        metrics: Named scalar results
        files: Artifacts written
        sweep: α sweep, when one was run
        lines: Human-readable summary lines
    """

    command: Command
    metrics: Dict[str, float] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)
    sweep: Optional[AlphaSweep] = None
    lines: List[str] = field(default_factory=list)


@dataclass
class CalibrationData:
    """A profile ready for inversion.

    Attributes:
        density: Profile N_ε on the working grid
        growth: Growth law
        malthus: λ₀ reported for the dataset
        lambda_override: λ forced into the inversion, if any
        filter_width: Hybrid filter width, if resolved
        meta: Dataset metadata
    """

    density: SizeDensity
    growth: GrowthLaw
    malthus: float
    lambda_override: Optional[float] = None
    filter_width: Optional[float] = None
    meta: DatasetMeta = field(default_factory=DatasetMeta)


class CalibrationPipeline:
    """Run a configured command end to end.

    Attributes:
        config: Run configuration
        dataset: Synthetic preset used by synth, if any
    """

    def __init__(self, config: RunConfig, dataset: Optional[SyntheticDataset] = None) -> None:
        self.config = config
        self.dataset = dataset
        self.output_dir = Path(config.output_dir)

    def run(self) -> PipelineResult:
        handlers = {
            Command.EIGEN: self.run_eigen,
            Command.SIMULATE: self.run_simulate,
            Command.CALIBRATE: self.run_calibrate,
            Command.SWEEP: self.run_sweep,
            Command.ROUNDTRIP: self.run_roundtrip,
            Command.SYNTH: self.run_synth,
        }
        logger.info(f"Running {self.config.command.value}")
        return handlers[self.config.command]()

    # Building blocks

    def overridden(self, name: str) -> bool:
        return name in self.config.overrides

    def growth_law(self, coefficient: Optional[float] = None, kind: Optional[str] = None) -> GrowthLaw:
        value = self.config.growth_coefficient if coefficient is None else coefficient
        if (kind or self.config.growth) == "exponential":
            return GrowthLaw.exponential(value)
        return GrowthLaw.linear(value)

    def make_grid(self, x_max: float) -> UniformGrid:
        """Grid on [0, x_max] from either dx or n_points."""
        grid = self.config.grid
        if grid.dx:
            n_points = int(round(x_max / grid.dx)) + 1
            return UniformGrid(dx=grid.dx, n_points=n_points)
        return UniformGrid.spanning(x_max, grid.n_points)

    def synthetic_x_max(self) -> float:
        if self.overridden("grid.x_max") or (self.config.grid.x_max and self.dataset is None):
            return float(self.config.grid.x_max)  # type: ignore[arg-type]
        if self.dataset is not None:
            return self.dataset.x_max
        return SYNTHETIC_X_MAX

    def solver_config(self, grid: UniformGrid, growth: GrowthLaw) -> SolverConfig:
        settings = self.config.solver
        return SolverConfig.for_problem(
            grid,
            growth,
            courant=settings.courant,
            t_max=settings.t_max,
            convergence_tol=settings.convergence_tol,
            max_steps=settings.max_steps,
            record_every=settings.record_every,
        )

    def load_rate(self) -> DivisionRate:
        """Rate from --input (`x,B`), else a constant rate on the synthetic grid."""
        if self.config.input_path:
            rate = read_rate_csv(self.config.input_path)
            logger.info(f"Loaded division rate on {rate.grid.n_points} nodes from {self.config.input_path}")
            return rate
        value = self.config.rate_constant if self.config.rate_constant is not None else DEFAULT_RATE
        return sample_rate(constant_rate(value), self.make_grid(self.synthetic_x_max()))

    def histogram_x_max(self, histogram: RawHistogram) -> float:
        """Flag, then 4·V_b from metadata, then the YAML value, then 1.5× the largest volume."""
        if self.overridden("grid.x_max"):
            return float(self.config.grid.x_max)  # type: ignore[arg-type]
        if histogram.meta.mean_volume is None and self.config.grid.x_max:
            return float(self.config.grid.x_max)
        return default_x_max(histogram)

    def filter_width(self, meta: DatasetMeta) -> Optional[float]:
        """Flag, then the instrument σ from metadata, then the YAML value."""
        configured = self.config.regularization.filter_width
        if self.overridden("regularization.filter_width"):
            return configured
        if meta.diameter_sigma > 0:
            return volume_sigma(meta.diameter_sigma)
        return configured

    def load_data(self) -> CalibrationData:
        """Parse, complete, interpolate and deduce the growth constants of a histogram.

        Raises:
            MissingMetadata: If λ must come from a doubling time the file lacks
        """
        histogram = parse_histogram(self.config.input_path)  # type: ignore[arg-type]
        grid = self.make_grid(self.histogram_x_max(histogram))
        density = to_uniform_density(complete_boundaries(histogram, grid.x_max), grid)
        meta = histogram.meta

        if self.config.lambda_source is LambdaSource.DOUBLING:
            histogram.require_doubling_time()

        exponential = self.config.growth == "exponential"
        if meta.doubling_time is not None and not self.overridden("growth_coefficient"):
            malthus, growth = growth_constant_from_doubling(meta, density, exponential)
        else:
            growth = self.growth_law()
            if meta.doubling_time is not None:
                malthus = malthus_from_doubling(meta.doubling_time)
            else:
                malthus = malthus_from_density(density, growth)

        override = malthus if self.config.lambda_source is LambdaSource.DOUBLING else None
        logger.info(
            f"Dataset '{meta.label or self.config.input_path}': λ0={malthus:.6g}, "
            f"{growth.kind.value} growth coefficient {growth.coefficient:.6g}"
        )
        return CalibrationData(
            density=density,
            growth=growth,
            malthus=malthus,
            lambda_override=override,
            filter_width=self.filter_width(meta),
            meta=meta,
        )

    def selection_rule(self) -> SelectRule:
        rule = SelectRule(self.config.regularization.select)
        if self.config.command is Command.SWEEP and rule is SelectRule.NONE:
            return SelectRule.RATIO
        return rule

    def invert(
        self, data: CalibrationData
    ) -> Tuple[ReconstructionResult, Optional[AlphaSweep], Dict[str, float]]:
        """Reconstruct at the configured α, or sweep and select α.

        Returns:
            Tuple of (result, sweep or None, selection metrics)
        """
        regularization = self.config.regularization
        rule = self.selection_rule()

        if rule is SelectRule.NONE:
            reconstructor = create_reconstructor(
                regularization.method, data.growth, data.lambda_override, data.filter_width
            )
            return reconstructor.reconstruct(data.density, regularization.alpha), None, {}

        sweep = sweep_alpha(
            regularization.method,
            data.density,
            regularization.alphas,
            data.growth,
            lambda_override=data.lambda_override,
            filter_width=data.filter_width,
            max_workers=regularization.max_workers,
        )
        if rule is SelectRule.RATIO:
            alpha, flat = select_alpha_ratio(sweep)
            selection = {"alpha_star": alpha, "flat": float(flat)}
        else:
            alpha, degenerate = select_alpha_lcurve(sweep)
            selection = {"alpha_star": alpha, "lcurve_degenerate": float(degenerate)}
        return sweep.result_for(alpha), sweep, selection

    def write(self, outcome: PipelineResult, path: Path) -> None:
        outcome.files.append(path)

    def growth_footer(self, growth: GrowthLaw) -> Dict[str, object]:
        return {"growth": growth.kind.value, "growth_coefficient": growth.coefficient}

    # Commands

    def run_eigen(self) -> PipelineResult:
        rate = self.load_rate()
        growth = self.growth_law()
        pair = eigenpair_solve(rate, growth, self.solver_config(rate.grid, growth))

        outcome = PipelineResult(command=Command.EIGEN)
        footer: Dict[str, object] = {
            "lambda": pair.malthus,
            "moment_lambda": pair.moment_malthus,
            "steps": pair.steps,
        }
        footer.update(self.growth_footer(growth))
        self.write(outcome, write_density_csv(self.output_dir / "N.csv", pair.density, footer))

        outcome.metrics = {
            "lambda0": pair.malthus,
            "moment_lambda": pair.moment_malthus,
            "moment_gap": abs(pair.malthus - pair.moment_malthus),
            "steps": float(pair.steps),
        }
        outcome.lines = [
            f"Malthus parameter λ0 = {pair.malthus:.8g}",
            f"Moment identity ∫gN/∫xN = {pair.moment_malthus:.8g} (gap {outcome.metrics['moment_gap']:.2e})",
            f"Converged in {pair.steps} steps",
        ]
        return outcome

    def run_simulate(self) -> PipelineResult:
        rate = self.load_rate()
        growth = self.growth_law()
        grid = rate.grid
        config = self.solver_config(grid, growth)

        initial = SizeDensity.from_values(grid, default_initial_profile(grid), normalize=True)
        trajectory = transient_solve(initial, rate, growth, config)

        outcome = PipelineResult(command=Command.SIMULATE)
        self.write(outcome, write_trajectory_csv(self.output_dir / "trajectory.csv", trajectory))
        outcome.metrics["clamped_mass"] = trajectory.clamped_mass
        outcome.lines.append(f"Recorded {len(trajectory.states)} states up to t={config.t_max:g}")

        if len(trajectory.states) >= 3:
            number, biomass = balance_residuals(trajectory, rate, growth)
            outcome.metrics.update({"number_balance": number, "biomass_balance": biomass})
            outcome.lines.append(f"Balance residuals: number {number:.3e}, biomass {biomass:.3e}")

        if rate.is_zero():
            logger.info("Division rate is zero; skipping convergence to the steady profile")
            return outcome

        pair = eigenpair_solve(rate, growth, config, initial=initial)
        distances = convergence_distances(trajectory, pair)
        rows = zip(trajectory.times, distances)
        self.write(outcome, write_table(self.output_dir / "convergence.csv", ("t", "distance"), rows))
        outcome.metrics.update({"lambda0": pair.malthus, "final_distance": float(distances[-1])})
        outcome.lines.append(
            f"λ0 = {pair.malthus:.8g}; L1 distance to the steady profile at t={config.t_max:g}: "
            f"{distances[-1]:.3e}"
        )
        return outcome

    def calibration_metrics(
        self, data: CalibrationData, result: ReconstructionResult
    ) -> Dict[str, float]:
        metrics = {
            "lambda0": data.malthus,
            "lambda_used": result.lambda_used,
            "growth_coefficient": data.growth.coefficient,
            "alpha": result.alpha,
            "residual": result.residual,
        }
        metrics.update(result.diagnostics.as_dict())
        return metrics

    def report_lines(
        self, data: CalibrationData, result: ReconstructionResult, selection: Dict[str, float]
    ) -> List[str]:
        symbol = "g0" if data.growth.kind is GrowthKind.LINEAR else "kappa"
        diagnostics = result.diagnostics
        lines = [
            f"dataset: {data.meta.label or self.config.input_path}",
            f"method: {result.method.value}",
            f"growth: {data.growth.kind.value} ({symbol} = {data.growth.coefficient:.8g})",
            f"lambda0: {data.malthus:.8g}",
            f"lambda_used: {result.lambda_used:.8g}",
            f"alpha: {result.alpha:.6g}",
            f"residual: {result.residual:.6g}",
        ]
        if "flat" in selection:
            lines.append(f"flat: {bool(selection['flat'])}")
        if "lcurve_degenerate" in selection:
            lines.append(f"lcurve_degenerate: {bool(selection['lcurve_degenerate'])}")
        if diagnostics.filter_width is not None:
            lines.append(f"filter_width: {diagnostics.filter_width:.6g}")
        lines.extend(
            [
                f"clamped_nodes: {diagnostics.clamp_count}",
                f"clamped_mass: {diagnostics.clamped_mass:.6g}",
                f"floored_nodes: {diagnostics.floor_count}",
                f"oversmoothed: {diagnostics.oversmoothed}",
            ]
        )
        return lines

    def run_calibrate(self) -> PipelineResult:
        data = self.load_data()
        result, sweep, selection = self.invert(data)

        outcome = PipelineResult(command=self.config.command, sweep=sweep)
        extra = self.growth_footer(data.growth)
        self.write(outcome, write_result_csv(self.output_dir / "B.csv", result, extra))
        self.write(outcome, write_density_csv(self.output_dir / "N.csv", data.density))
        if sweep is not None:
            self.write(outcome, write_sweep_csv(self.output_dir / "sweep.csv", sweep))

        outcome.lines = self.report_lines(data, result, selection)
        report = self.output_dir / "report.txt"
        report.write_text("\n".join(outcome.lines) + "\n", encoding="utf-8")
        self.write(outcome, report)

        outcome.metrics = self.calibration_metrics(data, result)
        outcome.metrics.update(selection)
        return outcome

    def run_sweep(self) -> PipelineResult:
        return self.run_calibrate()

    def run_roundtrip(self) -> PipelineResult:
        if self.config.input_path:
            return self.roundtrip_from_result()
        return self.roundtrip_synthetic()

    def roundtrip_from_result(self) -> PipelineResult:
        """Forward-solve a reconstructed B.csv and compare with the profile it came from.

        When the data density sits next to B.csv (N.csv from calibrate,
        N_noisy.csv from a synthetic roundtrip) the forward profile is also
        compared with it, since N_used is the smoothed profile for filter and
        hybrid runs.
        """
        input_path = Path(self.config.input_path)  # type: ignore[arg-type]
        rate, profile, footer = read_result_csv(input_path)
        kind = None if self.overridden("growth") else footer.get("growth")
        coefficient = None
        if "growth_coefficient" in footer and not self.overridden("growth_coefficient"):
            coefficient = float(footer["growth_coefficient"])
        growth = self.growth_law(coefficient, kind)

        pair = eigenpair_solve(rate, growth, self.solver_config(rate.grid, growth))
        reference = profile.normalize()
        distance = l1_distance(pair.density, reference)

        outcome = PipelineResult(command=Command.ROUNDTRIP)
        self.write(outcome, write_density_csv(self.output_dir / "N_roundtrip.csv", pair.density))
        outcome.metrics = {"lambda0": pair.malthus, "l1_distance": distance}
        outcome.lines = [f"λ0 of the reconstructed rate: {pair.malthus:.8g}", f"L1(N_in, N_out) = {distance:.4e}"]

        data = sibling_data_density(input_path, rate.grid)
        if data is not None:
            data_distance = l1_distance(pair.density, data)
            outcome.metrics["l1_distance_data"] = data_distance
            outcome.lines.append(f"L1(N_data, N_out) = {data_distance:.4e}")
        if "lambda" in footer:
            mismatch = abs(pair.malthus - float(footer["lambda"]))
            outcome.metrics["lambda_mismatch"] = mismatch
            outcome.lines.append(f"λ mismatch = {mismatch:.3e}")
        return outcome

    def roundtrip_synthetic(self) -> PipelineResult:
        """Choose B, solve forward, add noise, invert, and solve forward again."""
        grid = self.make_grid(self.synthetic_x_max())
        if self.config.rate_constant is not None:
            truth = sample_rate(constant_rate(self.config.rate_constant), grid)
        else:
            truth = sample_rate(bump_rate, grid)
        growth = self.growth_law()
        solver = self.solver_config(grid, growth)

        pair = eigenpair_solve(truth, growth, solver)
        noise = self.config.noise
        noisy = add_noise(pair.density, NoiseSpec(noise.epsilon, noise.seed, NoiseKind(noise.kind)))
        override = pair.malthus if self.config.lambda_source is LambdaSource.DOUBLING else None
        data = CalibrationData(
            density=noisy,
            growth=growth,
            malthus=pair.malthus,
            lambda_override=override,
            filter_width=self.config.regularization.filter_width,
            meta=DatasetMeta(label="synthetic"),
        )
        result, sweep, selection = self.invert(data)
        recovered = eigenpair_solve(result.rate, growth, solver, initial=pair.density)

        outcome = PipelineResult(command=Command.ROUNDTRIP, sweep=sweep)
        self.write(outcome, write_rate_csv(self.output_dir / "B_true.csv", truth))
        self.write(outcome, write_density_csv(self.output_dir / "N_true.csv", pair.density))
        self.write(outcome, write_density_csv(self.output_dir / "N_noisy.csv", noisy))
        self.write(
            outcome, write_result_csv(self.output_dir / "B.csv", result, self.growth_footer(growth))
        )
        self.write(outcome, write_density_csv(self.output_dir / "N_roundtrip.csv", recovered.density))
        if sweep is not None:
            self.write(outcome, write_sweep_csv(self.output_dir / "sweep.csv", sweep))

        distance = l1_distance(pair.density, recovered.density)
        outcome.metrics = self.calibration_metrics(data, result)
        outcome.metrics.update(selection)
        outcome.metrics.update(
            {
                "l1_distance": distance,
                "lambda_mismatch": abs(recovered.malthus - pair.malthus),
                "rate_error": rate_error(result.rate, truth, pair.density),
                "realized_noise": realized_noise(pair.density, noisy),
            }
        )
        outcome.lines = [
            f"True λ0 = {pair.malthus:.8g}, recovered λ0 = {recovered.malthus:.8g}",
            f"L1(N_true, N_roundtrip) = {distance:.4e}",
            f"N-weighted rate error = {outcome.metrics['rate_error']:.4e}",
        ]
        return outcome

    def run_synth(self) -> PipelineResult:
        """Sample a forward eigen profile into a histogram file."""
        dataset = self.dataset
        if self.config.input_path:
            truth = read_rate_csv(self.config.input_path)
        else:
            grid = self.make_grid(self.synthetic_x_max())
            if self.config.rate_constant is not None or dataset is None:
                value = self.config.rate_constant if self.config.rate_constant is not None else DEFAULT_RATE
                truth = sample_rate(constant_rate(value), grid)
            else:
                truth = sample_rate(dataset.rate, grid)
        grid = truth.grid
        growth = self.growth_law()
        pair = eigenpair_solve(truth, growth, self.solver_config(grid, growth))

        # Rescaling B and g by the same factor keeps N and scales λ0 to ln 2 / T0
        doubling_time = self.config.doubling_time
        if doubling_time is None and dataset is not None:
            doubling_time = dataset.doubling_time
        scale = 1.0
        if doubling_time is not None:
            scale = malthus_from_doubling(doubling_time) / pair.malthus
        malthus = pair.malthus * scale
        truth = DivisionRate(grid=grid, values=truth.values * scale)
        growth = GrowthLaw(growth.kind, growth.coefficient * scale)

        noise = self.config.noise
        epsilon, seed = noise.epsilon, noise.seed
        if dataset is not None:
            epsilon = noise.epsilon if self.overridden("noise.epsilon") else dataset.epsilon
            seed = noise.seed if self.overridden("noise.seed") else dataset.seed
        noisy = add_noise(pair.density, NoiseSpec(epsilon, seed, NoiseKind(noise.kind)))

        channels = self.config.channels
        if dataset is not None and not self.overridden("channels"):
            channels = dataset.channels
        values = np.asarray(pair.density.values)
        significant = np.flatnonzero(values >= CHANNEL_TAIL_FRACTION * values.max())
        x_end = grid.nodes[significant[-1]]
        volumes = x_end * np.arange(1, channels + 1) / channels
        counts = np.interp(volumes, grid.nodes, noisy.values)

        meta = DatasetMeta(
            doubling_time=math.log(2.0) / malthus,
            mean_volume=moment(pair.density, 1) / moment(pair.density, 0),
            label=dataset.name if dataset is not None else "synthetic",
        )
        outcome = PipelineResult(command=Command.SYNTH)
        self.write(outcome, write_histogram_csv(self.output_dir / "histogram.csv", volumes, counts, meta))
        self.write(outcome, write_rate_csv(self.output_dir / "B_true.csv", truth, self.growth_footer(growth)))
        self.write(outcome, write_density_csv(self.output_dir / "N_true.csv", pair.density))

        outcome.metrics = {
            "lambda0": malthus,
            "growth_coefficient": growth.coefficient,
            "mean_volume": float(meta.mean_volume),  # type: ignore[arg-type]
            "channels": float(channels),
            "epsilon": epsilon,
        }
        outcome.lines = [
            f"Sampled {channels} channels on (0, {x_end:.4g}] (label {meta.label})",
            f"λ0 = {malthus:.8g} (T0 = {meta.doubling_time:.6g} min), mean volume {meta.mean_volume:.6g}",
        ]
        return outcome


def sibling_data_density(result_path: Path, grid: UniformGrid) -> Optional[SizeDensity]:
    """Normalized data density stored next to a result file, on the result's grid."""
    for name in DATA_DENSITY_NAMES:
        path = result_path.with_name(name)
        if not path.exists():
            continue
        density = read_density_csv(path)
        if not density.grid.same_as(grid):
            density = resample(density, grid)
        logger.debug(f"Comparing the roundtrip with data density {path}")
        return density
    return None
