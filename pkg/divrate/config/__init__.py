"""Configuration management for divrate."""

from divrate.config.config import (
    DEFAULT_CONFIG_NAME,
    EXAMPLE_CONFIG_NAME,
    Command,
    ConfigError,
    GridConfig,
    LambdaSource,
    LedgerConfig,
    NoiseConfig,
    RegularizationConfig,
    RunConfig,
    SelectRule,
    SolverSettings,
    create_run_config,
    load_config,
)


__all__ = [
    "DEFAULT_CONFIG_NAME",
    "EXAMPLE_CONFIG_NAME",
    "Command",
    "ConfigError",
    "GridConfig",
    "LambdaSource",
    "LedgerConfig",
    "NoiseConfig",
    "RegularizationConfig",
    "RunConfig",
    "SelectRule",
    "SolverSettings",
    "create_run_config",
    "load_config",
]
