#!/usr/bin/env python3
"""divrate - division rate calibration CLI.

Command-line interface for recovering cell division rates from steady size
distributions, running the forward model, and generating synthetic data.
"""

import argparse
import logging
import shutil
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from divrate.config.config import (
    DEFAULT_CONFIG_NAME,
    EXAMPLE_CONFIG_NAME,
    Command,
    RunConfig,
    create_run_config,
    load_config,
)
from divrate.core.datasets import DATASETS, get_dataset
from divrate.core.orchestrator import CalibrationPipeline, PipelineResult
from divrate.model.errors import DivrateError
from divrate.persistence.ledger import LedgerError, RunLedger


# Constants
EXIT_INTERRUPTED = 130

# Configure logging
logger = logging.getLogger(__name__)

# Flag destination -> dotted RunConfig field
FLAG_FIELDS = {
    "input": "input_path",
    "output_dir": "output_dir",
    "growth": "growth",
    "growth_coefficient": "growth_coefficient",
    "lambda_source": "lambda_source",
    "rate": "rate_constant",
    "channels": "channels",
    "doubling_time": "doubling_time",
    "method": "regularization.method",
    "alpha": "regularization.alpha",
    "alphas": "regularization.alphas",
    "select": "regularization.select",
    "filter_width": "regularization.filter_width",
    "epsilon": "noise.epsilon",
    "seed": "noise.seed",
    "noise_kind": "noise.kind",
    "dx": "grid.dx",
    "n_points": "grid.n_points",
    "x_max": "grid.x_max",
    "t_max": "solver.t_max",
    "db": "ledger.db_path",
}


def setup_logging(verbose: bool = False) -> None:
    """Configure logging based on verbosity level.

    Args:
        verbose: If True, enable DEBUG level logging
    """
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s [%(levelname)s] %(message)s")


def parse_alphas(text: str) -> List[float]:
    """Parse a comma-separated α list, or START:STOP:COUNT for a geometric grid."""
    if ":" in text:
        return _geometric_alphas(text)
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid α list: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("α list is empty")
    return values


def _geometric_alphas(text: str) -> List[float]:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        message = f"invalid α grid {text!r}, expected START:STOP:COUNT"
        raise argparse.ArgumentTypeError(message) from None
    if not (start > 0 and stop > start and count >= 2):
        raise argparse.ArgumentTypeError(f"α grid {text!r} needs 0 < START < STOP and COUNT ≥ 2")
    return [float(value) for value in np.geomspace(start, stop, count)]


def build_run_config(args: argparse.Namespace, command: Command) -> RunConfig:
    """Merge the YAML file (if any) and command-line flags."""
    config_path = args.config
    if config_path is None and Path(DEFAULT_CONFIG_NAME).exists():
        config_path = DEFAULT_CONFIG_NAME
    config_dict: Dict[str, Any] = load_config(config_path) if config_path else {}

    flags = {field: getattr(args, dest, None) for dest, field in FLAG_FIELDS.items()}
    if getattr(args, "no_ledger", False):
        flags["ledger.enabled"] = False
    return create_run_config(command, config_dict, flags)


def open_ledger(config: RunConfig) -> Optional[RunLedger]:
    if not config.ledger.enabled:
        return None
    try:
        return RunLedger(str(config.db_path()))
    except LedgerError as exc:
        logger.warning(f"Run ledger unavailable: {exc}")
        return None


def print_outcome(outcome: PipelineResult) -> None:
    for line in outcome.lines:
        print(f"  {line}")
    for path in outcome.files:
        print(f"✓ Wrote {path}")


def run_pipeline(args: argparse.Namespace, command: Command) -> int:
    """Run one pipeline command with ledger bookkeeping.

    Args:
        args: Parsed command-line arguments
        command: Pipeline command

    Returns:
        Exit code (0 for success, the error's code otherwise)
    """
    config = build_run_config(args, command)
    dataset = get_dataset(args.dataset) if getattr(args, "dataset", None) else None
    Path(config.output_dir).mkdir(parents=True, exist_ok=True)

    ledger = open_ledger(config)
    run_id = None
    if ledger is not None:
        try:
            run_id = ledger.start_run(command.value, config.to_dict())
        except LedgerError as exc:
            logger.warning(f"Could not record run: {exc}")

    print(f"=== divrate {command.value} ===\n")
    try:
        outcome = CalibrationPipeline(config, dataset).run()
    except DivrateError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        print(f"✗ {command.value} failed: {exc}")
        finish_ledger_run(ledger, run_id, "failed", exc.exit_code, str(exc))
        return exc.exit_code

    print_outcome(outcome)
    if ledger is not None and run_id is not None:
        try:
            ledger.record_metrics(run_id, outcome.metrics)
            if outcome.sweep is not None:
                ledger.record_sweep(run_id, outcome.sweep)
        except LedgerError as exc:
            logger.warning(f"Could not record results: {exc}")
    finish_ledger_run(ledger, run_id, "completed", 0)
    return 0


def finish_ledger_run(
    ledger: Optional[RunLedger],
    run_id: Optional[int],
    status: str,
    exit_code: int,
    error: Optional[str] = None,
) -> None:
    if ledger is None:
        return
    try:
        if run_id is not None:
            ledger.finish_run(run_id, status, exit_code, error)
    except LedgerError as exc:
        logger.warning(f"Could not finish run record: {exc}")
    finally:
        ledger.close()


def cmd_eigen(args: argparse.Namespace) -> int:
    """Solve the stationary eigenproblem for a division rate."""
    return run_pipeline(args, Command.EIGEN)


def cmd_simulate(args: argparse.Namespace) -> int:
    """Integrate the transient equation and check the balance laws."""
    return run_pipeline(args, Command.SIMULATE)


def cmd_calibrate(args: argparse.Namespace) -> int:
    """Reconstruct the division rate of a measured histogram."""
    return run_pipeline(args, Command.CALIBRATE)


def cmd_sweep(args: argparse.Namespace) -> int:
    """Sweep α for one method and select it."""
    return run_pipeline(args, Command.SWEEP)


def cmd_roundtrip(args: argparse.Namespace) -> int:
    """Check a reconstruction against the forward model."""
    return run_pipeline(args, Command.ROUNDTRIP)


def cmd_synth(args: argparse.Namespace) -> int:
    """Generate a synthetic histogram from a known rate."""
    return run_pipeline(args, Command.SYNTH)


def cmd_init_config(args: argparse.Namespace) -> int:
    """Generate example configuration file.

    Args:
        args: Parsed command-line arguments

    Returns:
        Exit code (0 for success, 1 for failure)
    """
    source_file = Path(__file__).parent / "config" / EXAMPLE_CONFIG_NAME
    if not source_file.exists():
        print(f"Error: Example config file not found at {source_file}")
        print("This might indicate a corrupted installation.")
        return 1

    output_file = Path(args.output) if args.output else Path(DEFAULT_CONFIG_NAME)
    if output_file.exists() and not args.force:
        print(f"✗ File '{output_file}' already exists (use --force to overwrite)")
        return 1

    try:
        shutil.copy(source_file, output_file)
    except OSError as exc:
        print(f"Error copying config file: {exc}")
        return 1

    print(f"✓ Example configuration created: {output_file}")
    print("\nNext steps:")
    print(f"  1. Edit {output_file} with your grid and regularization settings")
    print(f"  2. Run: divrate -c {output_file} calibrate --input histogram.csv")
    return 0


def history_db_path(args: argparse.Namespace) -> Path:
    if args.db:
        return Path(args.db)
    return Path(args.output_dir or ".") / "divrate.db"


def cmd_history(args: argparse.Namespace) -> int:
    """List recent runs from the ledger.

    Returns:
        Exit code (0 for success, 1 if no ledger exists)
    """
    db_path = history_db_path(args)
    if not db_path.exists():
        print(f"No run ledger found at {db_path}")
        return 1

    ledger = RunLedger(str(db_path))
    try:
        runs = ledger.list_runs(limit=args.limit)
        if not runs:
            print("No runs recorded")
            return 0
        print(f"{'id':>5s}  {'command':10s} {'status':10s} {'exit':>4s}  started")
        for run in runs:
            exit_code = "-" if run.exit_code is None else str(run.exit_code)
            print(f"{run.run_id:5d}  {run.command:10s} {run.status:10s} {exit_code:>4s}  {run.started}")
        return 0
    finally:
        ledger.close()


def cmd_report(args: argparse.Namespace) -> int:
    """Print or save the report of a recorded run.

    Returns:
        Exit code (0 for success, 1 for failure)
    """
    db_path = history_db_path(args)
    if not db_path.exists():
        print(f"No run ledger found at {db_path}")
        return 1

    ledger = RunLedger(str(db_path))
    try:
        run_id = args.run_id
        if not run_id:
            latest = ledger.latest_run()
            if latest is None:
                print("No runs recorded")
                return 1
            run_id = latest.run_id

        report = ledger.export_report(run_id, format=args.format)
        if args.output:
            Path(args.output).write_text(report + "\n", encoding="utf-8")
            print(f"Report saved to: {args.output}")
        else:
            print(report)
        return 0
    finally:
        ledger.close()


def add_output_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output-dir", help="Directory for CSV artifacts (default: .)")
    parser.add_argument("--db", help="Run ledger database (default: <output-dir>/divrate.db)")
    parser.add_argument("--no-ledger", action="store_true", help="Do not record this run")


def add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--growth", choices=["linear", "exponential"], help="Growth law")
    parser.add_argument(
        "--growth-coefficient", type=float, help="g0 (linear) or kappa (exponential)"
    )
    parser.add_argument("--dx", type=float, help="Grid spacing (overrides --n-points)")
    parser.add_argument("--n-points", type=int, help="Number of grid nodes (default: 1025)")
    parser.add_argument("--x-max", type=float, help="Domain end in μm³")


def add_inversion_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--method", choices=["exact", "qr", "filter", "hybrid"], help="Inversion method"
    )
    parser.add_argument("--alpha", type=float, help="Regularization parameter")
    parser.add_argument(
        "--alphas",
        type=parse_alphas,
        help="Sweep values, e.g. 0.05,0.1,0.2, or START:STOP:COUNT for a geometric grid",
    )
    parser.add_argument(
        "--select", choices=["ratio", "lcurve", "none"], help="α selection rule over --alphas"
    )
    parser.add_argument("--filter-width", type=float, help="Hybrid mollifier width")
    parser.add_argument(
        "--lambda-source",
        choices=["moment", "eq7", "doubling"],
        help="Malthus parameter from the regularized moment identity or from ln 2 / T0",
    )


def add_noise_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", type=float, help="Relative noise level")
    parser.add_argument("--seed", type=int, help="Noise seed")
    parser.add_argument("--noise-kind", choices=["multiplicative", "additive"], help="Noise model")


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser.

    Returns:
        Configured ArgumentParser
    """
    parser = argparse.ArgumentParser(
        description="Division rate calibration from steady size distributions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Environment: DIVRATE_THREADS caps concurrent α reconstructions.",
    )
    parser.add_argument("-c", "--config", help=f"Configuration file (default: ./{DEFAULT_CONFIG_NAME} if present)")
    parser.add_argument("-v", "--verbose", action="store_true", help="Verbose output")

    subparsers = parser.add_subparsers(dest="command", help="Commands")

    # eigen command
    parser_eigen = subparsers.add_parser("eigen", help="Solve for the steady profile N and λ0")
    parser_eigen.add_argument("--input", help="Division rate CSV (x,B); default constant --rate")
    parser_eigen.add_argument("--rate", type=float, help="Constant division rate (default: 1)")
    add_model_arguments(parser_eigen)
    add_output_arguments(parser_eigen)

    # simulate command
    parser_simulate = subparsers.add_parser("simulate", help="Integrate the transient equation")
    parser_simulate.add_argument("--input", help="Division rate CSV (x,B); default constant --rate")
    parser_simulate.add_argument("--rate", type=float, help="Constant division rate (default: 1)")
    parser_simulate.add_argument("--t-max", type=float, help="Final time")
    add_model_arguments(parser_simulate)
    add_output_arguments(parser_simulate)

    # calibrate and sweep commands
    for name, text in (
        ("calibrate", "Reconstruct B from a measured histogram"),
        ("sweep", "Sweep α and select it (ratio rule unless --select)"),
    ):
        sub = subparsers.add_parser(name, help=text)
        sub.add_argument("--input", help="Histogram CSV (volume,count)")
        add_model_arguments(sub)
        add_inversion_arguments(sub)
        add_output_arguments(sub)

    # roundtrip command
    parser_roundtrip = subparsers.add_parser(
        "roundtrip", help="Forward-check a B.csv, or run a full synthetic experiment"
    )
    parser_roundtrip.add_argument("--input", help="Reconstruction CSV (x,B,N_used,H)")
    parser_roundtrip.add_argument("--rate", type=float, help="Constant true rate (default: bump)")
    add_model_arguments(parser_roundtrip)
    add_inversion_arguments(parser_roundtrip)
    add_noise_arguments(parser_roundtrip)
    add_output_arguments(parser_roundtrip)

    # synth command
    parser_synth = subparsers.add_parser("synth", help="Generate a synthetic histogram")
    parser_synth.add_argument("--input", help="Division rate CSV (x,B)")
    parser_synth.add_argument("--rate", type=float, help="Constant division rate (default: 1)")
    parser_synth.add_argument("--dataset", choices=sorted(DATASETS), help="Bundled dataset preset")
    parser_synth.add_argument("--channels", type=int, help="Number of histogram channels")
    parser_synth.add_argument("--doubling-time", type=float, help="Target doubling time in minutes")
    add_model_arguments(parser_synth)
    add_noise_arguments(parser_synth)
    add_output_arguments(parser_synth)

    # init-config command
    parser_init_config = subparsers.add_parser("init-config", help="Generate example configuration file")
    parser_init_config.add_argument("--output", "-o", help=f"Output file path (default: {DEFAULT_CONFIG_NAME})")
    parser_init_config.add_argument("--force", "-f", action="store_true", help="Overwrite existing file")

    # history command
    parser_history = subparsers.add_parser("history", help="List recorded runs")
    parser_history.add_argument("--limit", type=int, default=20, help="Number of runs to show")
    parser_history.add_argument("--output-dir", help="Directory holding divrate.db")
    parser_history.add_argument("--db", help="Run ledger database")

    # report command
    parser_report = subparsers.add_parser("report", help="Show the report of a recorded run")
    parser_report.add_argument("--run-id", type=int, help="Run ID (default: latest)")
    parser_report.add_argument("--format", choices=["text", "json"], default="text", help="Report format")
    parser_report.add_argument("--output", "-o", help="Output file")
    parser_report.add_argument("--output-dir", help="Directory holding divrate.db")
    parser_report.add_argument("--db", help="Run ledger database")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point.

    Returns:
        Exit code
    """
    parser = create_parser()
    args = parser.parse_args(argv)

    setup_logging(args.verbose)

    handlers = {
        "eigen": cmd_eigen,
        "simulate": cmd_simulate,
        "calibrate": cmd_calibrate,
        "sweep": cmd_sweep,
        "roundtrip": cmd_roundtrip,
        "synth": cmd_synth,
        "init-config": cmd_init_config,
        "history": cmd_history,
        "report": cmd_report,
    }

    try:
        handler = handlers.get(args.command)
        if handler is None:
            parser.print_help()
            return 1
        return handler(args)

    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        return EXIT_INTERRUPTED
    except DivrateError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except Exception as exc:
        logger.error(f"Fatal error: {exc}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
