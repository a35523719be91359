#!/usr/bin/env python3
"""Configuration classes and YAML loading for divrate.

Values are resolved with the precedence: command-line flags, then histogram
metadata lines (applied by the pipeline), then the YAML file, then the
dataclass defaults below.
"""

import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Set

import yaml

from divrate.model.errors import DivrateError


logger = logging.getLogger(__name__)

# Constants
DEFAULT_CONFIG_NAME = "divrate.yaml"
EXAMPLE_CONFIG_NAME = "divrate.yaml.example"


class ConfigError(DivrateError):
    """Invalid or unreadable configuration."""

    exit_code = 2


class Command(Enum):
    """Pipeline commands."""

    EIGEN = "eigen"
    SIMULATE = "simulate"
    CALIBRATE = "calibrate"
    SWEEP = "sweep"
    ROUNDTRIP = "roundtrip"
    SYNTH = "synth"


class LambdaSource(Enum):
    """Where the Malthus parameter of an inversion comes from."""

    MOMENT = "moment"  # regularized moment identity of the chosen method
    DOUBLING = "doubling"  # ln 2 / T₀ from the histogram metadata

    @classmethod
    def _missing_(cls, value: object) -> Optional["LambdaSource"]:
        if value == "eq7":
            return cls.MOMENT
        return None


class SelectRule(Enum):
    """Automatic α selection rules."""

    RATIO = "ratio"
    LCURVE = "lcurve"
    NONE = "none"


@dataclass
class GridConfig:
    """Volume grid.

    Attributes:
        x_max: Domain end (μm³); None derives it from the data
        n_points: Number of nodes, used when dx is not given
        dx: Node spacing; overrides n_points
    """

    x_max: Optional[float] = None
    n_points: int = 2**10 + 1
    dx: Optional[float] = None


@dataclass
class SolverSettings:
    """Forward solver settings.

    Attributes:
        courant: Time step as a fraction of the CFL limit dx / max g
        t_max: Transient horizon (min)
        convergence_tol: Eigen iteration tolerance
        max_steps: Eigen iteration step budget
        record_every: Transient recording stride (steps)
    """

    courant: float = 0.5
    t_max: float = 20.0
    convergence_tol: float = 1e-8
    max_steps: int = 1_000_000
    record_every: int = 100


@dataclass
class RegularizationConfig:
    """Inversion method and α choice.

    Attributes:
        method: exact, qr, filter or hybrid
        alpha: Regularization parameter when no sweep is run
        alphas: Sweep values
        select: ratio, lcurve or none (use alpha)
        filter_width: Hybrid mollifier width; None derives it from sigma_um or 1e-4
        max_workers: Sweep threads; None defers to DIVRATE_THREADS
    """

    method: str = "qr"
    alpha: float = 0.1
    alphas: List[float] = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4, 0.8])
    select: str = "none"
    filter_width: Optional[float] = None
    max_workers: Optional[int] = None


@dataclass
class NoiseConfig:
    """Synthetic noise.

    Attributes:
        epsilon: Relative noise level
        seed: Generator seed
        kind: multiplicative or additive
    """

    epsilon: float = 0.0
    seed: int = 0
    kind: str = "multiplicative"


@dataclass
class LedgerConfig:
    """Run ledger.

    Attributes:
        enabled: Record runs in the ledger database
        db_path: Database path; None places divrate.db in the output directory
    """

    enabled: bool = True
    db_path: Optional[str] = None


@dataclass
class RunConfig:
    """Complete configuration of one CLI run.

    Attributes:
        command: Pipeline command
        input_path: Input CSV (histogram, rate or profile depending on the command)
        output_dir: Directory receiving the CSV artifacts
        growth: linear or exponential
        growth_coefficient: g₀ or κ when not deduced from data
        lambda_source: moment (alias eq7) or doubling
        channels: Histogram channels written by synth
        doubling_time: T₀ written into synthetic metadata (min)
        rate_constant: Constant B used when no rate file is given
        grid: Grid settings
        solver: Forward solver settings
        regularization: Inversion settings
        noise: Synthetic noise settings
        ledger: Ledger settings
        overrides: Field names set on the command line
    """

    command: Command
    input_path: Optional[str] = None
    output_dir: str = "."
    growth: str = "linear"
    growth_coefficient: float = 1.0
    lambda_source: LambdaSource = LambdaSource.MOMENT
    channels: int = 64
    doubling_time: Optional[float] = None
    rate_constant: Optional[float] = None
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverSettings = field(default_factory=SolverSettings)
    regularization: RegularizationConfig = field(default_factory=RegularizationConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    ledger: LedgerConfig = field(default_factory=LedgerConfig)
    overrides: Set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        validate_run_config(self)

    def output_path(self, name: str) -> Path:
        return Path(self.output_dir) / name

    def db_path(self) -> Path:
        if self.ledger.db_path:
            return Path(self.ledger.db_path)
        return self.output_path("divrate.db")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["command"] = self.command.value
        data["lambda_source"] = self.lambda_source.value
        data["overrides"] = sorted(self.overrides)
        return data


def validate_run_config(config: RunConfig) -> None:
    """Check documented ranges.

    Raises:
        ConfigError: On the first invalid field
    """
    file_commands = {Command.CALIBRATE, Command.SWEEP, Command.ROUNDTRIP}
    if config.command in file_commands and not config.input_path:
        raise ConfigError(f"'{config.command.value}' requires --input")
    if config.growth not in ("linear", "exponential"):
        raise ConfigError(f"Unknown growth law '{config.growth}'")
    if not config.growth_coefficient > 0:
        raise ConfigError(f"Growth coefficient must be positive, got {config.growth_coefficient}")
    if config.channels < 4:
        raise ConfigError(f"synth needs at least 4 channels, got {config.channels}")
    if config.rate_constant is not None and config.rate_constant < 0:
        raise ConfigError(f"Constant rate must be nonnegative, got {config.rate_constant}")

    grid = config.grid
    if grid.x_max is not None and not grid.x_max > 0:
        raise ConfigError(f"x_max must be positive, got {grid.x_max}")
    if grid.dx is not None and not grid.dx > 0:
        raise ConfigError(f"dx must be positive, got {grid.dx}")
    if grid.n_points < 4:
        raise ConfigError(f"n_points must be at least 4, got {grid.n_points}")

    solver = config.solver
    if not 0 < solver.courant <= 1:
        raise ConfigError(f"Courant number must lie in (0, 1], got {solver.courant}")
    if not (solver.t_max > 0 and solver.convergence_tol > 0):
        raise ConfigError("t_max and convergence_tol must be positive")
    if solver.max_steps < 1 or solver.record_every < 1:
        raise ConfigError("max_steps and record_every must be positive")

    regularization = config.regularization
    if regularization.method not in ("exact", "qr", "filter", "hybrid"):
        raise ConfigError(f"Unknown method '{regularization.method}'")
    if regularization.select not in ("ratio", "lcurve", "none"):
        raise ConfigError(f"Unknown selection rule '{regularization.select}'")
    if regularization.filter_width is not None and not regularization.filter_width > 0:
        raise ConfigError(f"filter_width must be positive, got {regularization.filter_width}")

    noise = config.noise
    if not noise.epsilon >= 0:
        raise ConfigError(f"epsilon must be nonnegative, got {noise.epsilon}")
    if noise.kind not in ("multiplicative", "additive"):
        raise ConfigError(f"Unknown noise kind '{noise.kind}'")


def load_config(config_path: str) -> Dict[str, Any]:
    """Load configuration from a YAML file.

    Relative paths in the file are resolved against the file's directory.

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    path = Path(config_path)
    try:
        with path.open(encoding="utf-8") as f:
            config_dict = yaml.safe_load(f) or {}
    except OSError as exc:
        raise ConfigError(f"Cannot read config file {config_path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"Invalid YAML in {config_path}: {exc}") from exc

    if not isinstance(config_dict, dict):
        raise ConfigError(f"Config file {config_path} must contain a mapping")

    config_dir = path.parent.resolve()
    for section, key in (("ledger", "db_path"), ("run", "input"), ("run", "output_dir")):
        value = (config_dict.get(section) or {}).get(key)
        if value and not Path(value).is_absolute():
            resolved = (config_dir / value).resolve()
            config_dict[section][key] = str(resolved)
            logger.debug(f"Resolved {section}.{key}: {value} -> {resolved}")

    return config_dict


def _section(config_dict: Dict[str, Any], name: str, cls: Any) -> Any:
    values = config_dict.get(name) or {}
    known = set(cls.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"Unknown keys in '{name}' section: {', '.join(sorted(unknown))}")
    return cls(**values)


def create_run_config(
    command: Command, config_dict: Dict[str, Any], flags: Dict[str, Any]
) -> RunConfig:
    """Merge YAML sections and command-line flags into a RunConfig.

    Args:
        command: Command being run
        config_dict: Parsed YAML (may be empty)
        flags: Flag values keyed by dotted field name (e.g. "grid.x_max");
            None means the flag was not given

    Raises:
        ConfigError: On unknown keys or invalid values
    """
    try:
        grid = _section(config_dict, "grid", GridConfig)
        solver = _section(config_dict, "solver", SolverSettings)
        regularization = _section(config_dict, "regularization", RegularizationConfig)
        noise = _section(config_dict, "noise", NoiseConfig)
        ledger = _section(config_dict, "ledger", LedgerConfig)
    except TypeError as exc:
        raise ConfigError(f"Invalid configuration value: {exc}") from exc

    run = dict(config_dict.get("run") or {})
    sections = {
        "grid": grid,
        "solver": solver,
        "regularization": regularization,
        "noise": noise,
        "ledger": ledger,
    }
    overrides: Set[str] = set()
    top_level: Dict[str, Any] = {
        "input_path": run.get("input"),
        "output_dir": run.get("output_dir", "."),
        "growth": run.get("growth", "linear"),
        "growth_coefficient": run.get("growth_coefficient", 1.0),
        "lambda_source": run.get("lambda_source", "moment"),
        "channels": run.get("channels", 64),
        "doubling_time": run.get("doubling_time"),
        "rate_constant": run.get("rate_constant"),
    }

    for name, value in flags.items():
        if value is None:
            continue
        overrides.add(name)
        section, _, key = name.rpartition(".")
        if section:
            setattr(sections[section], key, value)
        else:
            top_level[name] = value

    try:
        lambda_source = LambdaSource(top_level.pop("lambda_source"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        command=command,
        lambda_source=lambda_source,
        grid=grid,
        solver=solver,
        regularization=regularization,
        noise=noise,
        ledger=ledger,
        overrides=overrides,
        **top_level,
    )
