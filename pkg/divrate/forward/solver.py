#!/usr/bin/env python3
"""Forward solvers for the size-structured division equation.

    ∂t n + ∂x(g n) + B n = 4 B(2x) n(2x),   g(0) n(t, 0) = 0

Space is discretized by first-order upwind differences on the flux g·n
(mass enters from smaller volumes since g > 0), the dilation term reads node
2i exactly and vanishes beyond the grid, and time is advanced by explicit
Euler under the CFL condition dt·max g ≤ dx.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from divrate.model.errors import DegenerateDensity, DivrateError
from divrate.model.quantities import malthus_from_density
from divrate.model.types import (
    DivisionRate,
    EigenPair,
    GrowthLaw,
    SizeDensity,
    TransientState,
    UniformGrid,
)


logger = logging.getLogger(__name__)

# Constants
BLOW_UP_LIMIT = 1e300
DEFAULT_COURANT = 0.5
DEFAULT_CONVERGENCE_TOL = 1e-8
DEFAULT_MAX_STEPS = 1_000_000
MOMENT_AGREEMENT_FACTOR = 10.0  # eigen estimates must agree within this many dx
RATE_TAIL_FRACTION = 0.1
PROGRESS_LOG_INTERVAL = 10_000


class ForwardError(DivrateError):
    """Base exception for forward solver errors."""


class CflViolation(ForwardError):
    """Time step too large for the upwind scheme."""

    exit_code = 7


class BlowUp(ForwardError):
    """Solution left the representable range."""

    exit_code = 7


class NonConverged(ForwardError):
    """Eigen iteration did not settle."""

    exit_code = 8


class DegenerateInput(ForwardError):
    """Input cannot define the requested problem (e.g. B ≡ 0 for the eigenproblem)."""

    exit_code = 6


@dataclass
class SolverConfig:
    """Time-stepping configuration.

    Attributes:
        dt: Time step (min)
        t_max: Final time of transient runs (min)
        convergence_tol: L¹ and growth-rate tolerance of the eigen iteration
        max_steps: Step budget of the eigen iteration
        record_every: Record a transient state every this many steps
    """

    dt: float
    t_max: float = 1.0
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL
    max_steps: int = DEFAULT_MAX_STEPS
    record_every: int = 1

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise CflViolation(f"Time step must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if not self.convergence_tol > 0:
            raise ValueError(f"convergence_tol must be positive, got {self.convergence_tol}")
        if self.max_steps < 1 or self.record_every < 1:
            raise ValueError("max_steps and record_every must be positive")

    @classmethod
    def for_problem(
        cls,
        grid: UniformGrid,
        growth: GrowthLaw,
        courant: float = DEFAULT_COURANT,
        **kwargs,
    ) -> "SolverConfig":
        """Config whose time step uses the given Courant number, CFL-checked."""
        dt = courant * grid.dx / growth.max_speed(grid)
        config = cls(dt=dt, **kwargs)
        config.check_cfl(grid, growth)
        return config

    def check_cfl(self, grid: UniformGrid, growth: GrowthLaw) -> None:
        """Raise CflViolation unless dt·max g ≤ dx."""
        courant = self.dt * growth.max_speed(grid) / grid.dx
        if courant > 1.0 + 1e-12:
            raise CflViolation(
                f"CFL violated: dt={self.dt:.6g}, max g={growth.max_speed(grid):.6g}, "
                f"dx={grid.dx:.6g} (Courant number {courant:.4f} > 1)"
            )


@dataclass
class Trajectory:
    """Recorded states of a transient run.

    Attributes:
        grid: Grid shared by all states
        states: States in strictly increasing time order
        clamped_mass: Negative mass removed by positivity clamping
    """

    grid: UniformGrid
    states: List[TransientState] = field(default_factory=list)
    clamped_mass: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([state.time for state in self.states])

    def append(self, state: TransientState) -> None:
        if self.states and state.time <= self.states[-1].time:
            raise ValueError(f"Trajectory times must increase: {state.time} after {self.states[-1].time}")
        self.grid.require_same(state.density.grid)
        self.states.append(state)


def _generator(values: np.ndarray, rate: np.ndarray, speed: np.ndarray, dx: float) -> np.ndarray:
    flux = speed * values
    rhs = np.empty_like(values)
    rhs[0] = -flux[0] / dx
    rhs[1:] = -(flux[1:] - flux[:-1]) / dx
    rhs -= rate * values

    # nodes i with 2i inside the grid receive the daughters of node 2i
    half = (values.size + 1) // 2
    rhs[:half] += 4.0 * rate[0 : 2 * half : 2] * values[0 : 2 * half : 2]
    return rhs


def _clamp(values: np.ndarray, dx: float) -> float:
    values[0] = 0.0
    negative = values < 0
    if not negative.any():
        return 0.0
    removed = float(-values[negative].sum() * dx)
    values[negative] = 0.0
    return removed


def apply_generator(n: SizeDensity, rate: DivisionRate, growth: GrowthLaw) -> np.ndarray:
    """Semi-discrete right-hand side −D_up[g·n] − B·n + 4·B(2x)·n(2x).

    Raises:
        GridMismatch: If n and B live on different grids
    """
    n.grid.require_same(rate.grid)
    grid = n.grid
    return _generator(np.asarray(n.values), np.asarray(rate.values), growth.speed(grid), grid.dx)


def transient_solve(
    n0: SizeDensity, rate: DivisionRate, growth: GrowthLaw, config: SolverConfig
) -> Trajectory:
    """Integrate the transient equation from n0 up to config.t_max.

    The origin node is held at zero each step; negative values produced by
    discretization error are clamped and their mass is accumulated in
    Trajectory.clamped_mass.

    Raises:
        CflViolation: If the time step violates the CFL condition
        BlowUp: If any value exceeds 1e300 or becomes non-finite
        GridMismatch: If n0 and B live on different grids
    """
    n0.grid.require_same(rate.grid)
    grid = n0.grid
    config.check_cfl(grid, growth)

    speed = growth.speed(grid)
    rate_values = np.asarray(rate.values)
    values = np.array(n0.values, dtype=float)

    n_steps = max(1, int(math.ceil(config.t_max / config.dt - 1e-9)))
    trajectory = Trajectory(grid=grid)
    trajectory.append(TransientState.at(0.0, n0))

    logger.debug(f"Transient solve: {n_steps} steps of dt={config.dt:.4g} on {grid.n_points} nodes")

    time = 0.0
    for step in range(1, n_steps + 1):
        dt = config.dt if step < n_steps else config.t_max - time
        values = values + dt * _generator(values, rate_values, speed, grid.dx)
        trajectory.clamped_mass += _clamp(values, grid.dx)

        peak = float(np.max(values))
        if not np.isfinite(peak) or peak > BLOW_UP_LIMIT:
            raise BlowUp(f"Solution blew up at t={time + dt:.6g} (max value {peak:.3g})")

        time = step * config.dt if step < n_steps else config.t_max
        if step % config.record_every == 0 or step == n_steps:
            density = SizeDensity(grid=grid, values=values.copy(), normalized=False)
            trajectory.append(TransientState.at(time, density))

    if trajectory.clamped_mass > 0:
        logger.info(f"Positivity clamping removed mass {trajectory.clamped_mass:.3e}")
    return trajectory


def default_initial_profile(grid: UniformGrid) -> np.ndarray:
    """Unnormalized starting profile x·exp(−16x/x_max)."""
    x = grid.nodes
    scale = grid.x_max / 16.0
    return x * np.exp(-x / scale)


def eigenpair_solve(
    rate: DivisionRate,
    growth: GrowthLaw,
    config: SolverConfig,
    initial: Optional[SizeDensity] = None,
) -> EigenPair:
    """Principal eigenpair (N, λ₀) by renormalized long-time iteration.

    Each explicit step is followed by renormalization to unit mass; the
    per-step log growth of the mass estimates λ₀. The iteration stops when
    successive profiles differ by less than convergence_tol in L¹ and the
    growth estimate moves by less than convergence_tol.

    The returned λ₀ is the average log growth over the last tenth of the
    iterations, mapped back through the Euler amplification factor
    (expm1(λ·dt)/dt) so that it is the eigenvalue of the semi-discrete
    generator: apply_generator(N) = λ₀·N at convergence.

    Args:
        rate: Division rate B
        growth: Growth law g
        config: Time step, tolerance and step budget
        initial: Optional warm-start profile on the same grid

    Raises:
        DegenerateInput: If B vanishes identically
        NonConverged: If the budget is exhausted or the moment identity disagrees
        DegenerateDensity: If the mass collapses
    """
    if rate.is_zero():
        raise DegenerateInput("Division rate is identically zero; the eigenproblem has no solution")

    grid = rate.grid
    config.check_cfl(grid, growth)
    speed = growth.speed(grid)
    rate_values = np.asarray(rate.values)
    dx = grid.dx

    if initial is not None:
        grid.require_same(initial.grid)
        values = np.array(initial.values, dtype=float)
    else:
        values = default_initial_profile(grid)
    values[0] = 0.0
    mass = float(trapezoid(values, dx=dx))
    if not mass > 0:
        raise DegenerateDensity("Initial profile has no mass")
    values /= mass

    log_rates: List[float] = []
    previous_rate: Optional[float] = None
    converged = False

    for step in range(1, config.max_steps + 1):
        updated = values + config.dt * _generator(values, rate_values, speed, dx)
        _clamp(updated, dx)

        new_mass = float(trapezoid(updated, dx=dx))
        if not (np.isfinite(new_mass) and new_mass > 0):
            raise DegenerateDensity(f"Mass collapsed to {new_mass} at step {step}")
        log_rate = math.log(new_mass) / config.dt
        updated /= new_mass

        change = float(trapezoid(np.abs(updated - values), dx=dx))
        log_rates.append(log_rate)
        values = updated

        if step % PROGRESS_LOG_INTERVAL == 0:
            logger.debug(f"Eigen step {step}: rate={log_rate:.8f}, L1 change={change:.3e}")

        if (
            previous_rate is not None
            and change < config.convergence_tol
            and abs(log_rate - previous_rate) < config.convergence_tol
        ):
            converged = True
            break
        previous_rate = log_rate

    if not converged:
        raise NonConverged(f"Eigen iteration did not converge within {config.max_steps} steps")

    tail = max(1, int(len(log_rates) * RATE_TAIL_FRACTION))
    mean_log_rate = float(np.mean(log_rates[-tail:]))
    malthus = math.expm1(mean_log_rate * config.dt) / config.dt

    density = SizeDensity.from_values(grid, values, normalize=True)
    moment_malthus = malthus_from_density(density, growth)
    if abs(malthus - moment_malthus) > MOMENT_AGREEMENT_FACTOR * dx:
        raise NonConverged(
            f"Growth-rate estimate {malthus:.6g} disagrees with the moment identity "
            f"{moment_malthus:.6g} by more than {MOMENT_AGREEMENT_FACTOR:g}·dx"
        )

    logger.info(f"Eigen solve converged in {len(log_rates)} steps: λ0={malthus:.6g}")
    return EigenPair(density=density, malthus=malthus, moment_malthus=moment_malthus, steps=len(log_rates))


def balance_residuals(
    trajectory: Trajectory, rate: DivisionRate, growth: GrowthLaw
) -> Tuple[float, float]:
    """Check d𝒩/dt = ∫Bn and dℳ/dt = ∫gn along a trajectory.

    Derivatives are centered differences of the recorded totals; each
    residual is normalized by the instantaneous 𝒩 and maximized over the
    interior recorded times.

    Returns:
        Tuple of (number_residual, biomass_residual)
    """
    states = trajectory.states
    if len(states) < 3:
        raise ValueError(f"Balance check needs at least 3 states, got {len(states)}")
    trajectory.grid.require_same(rate.grid)

    grid = trajectory.grid
    speed = growth.speed(grid)
    times = trajectory.times
    numbers = np.array([state.total_number for state in states])
    biomasses = np.array([state.total_biomass for state in states])

    number_residual = 0.0
    biomass_residual = 0.0
    for j in range(1, len(states) - 1):
        span = times[j + 1] - times[j - 1]
        d_number = (numbers[j + 1] - numbers[j - 1]) / span
        d_biomass = (biomasses[j + 1] - biomasses[j - 1]) / span

        values = states[j].density.values
        births = trapezoid(rate.values * values, dx=grid.dx)
        uptake = trapezoid(speed * values, dx=grid.dx)
        scale = numbers[j] if numbers[j] > 0 else 1.0

        number_residual = max(number_residual, abs(d_number - births) / scale)
        biomass_residual = max(biomass_residual, abs(d_biomass - uptake) / scale)

    return float(number_residual), float(biomass_residual)


def convergence_distances(trajectory: Trajectory, pair: EigenPair) -> np.ndarray:
    """L¹ distance between e^{−λ₀t} n(t, ·), rescaled by its best multiple, and N.

    The multiple m is the L² projection of the rescaled state onto N; the
    distance is ‖u/m − N‖₁.
    """
    trajectory.grid.require_same(pair.density.grid)
    dx = trajectory.grid.dx
    target = np.asarray(pair.density.values)
    target_norm = float(trapezoid(target * target, dx=dx))

    distances = []
    for state in trajectory.states:
        scaled = np.asarray(state.density.values) * math.exp(-pair.malthus * state.time)
        multiple = float(trapezoid(scaled * target, dx=dx)) / target_norm
        if multiple <= 0:
            distances.append(float("inf"))
            continue
        distances.append(float(trapezoid(np.abs(scaled / multiple - target), dx=dx)))
    return np.array(distances)
