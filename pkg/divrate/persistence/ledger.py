#!/usr/bin/env python3
"""Run ledger - persistent record of CLI runs using SQLAlchemy ORM.

Stores each run's configuration, outcome, scalar metrics and α sweeps, and
renders reports. The ledger never feeds back into the CSV artifacts.
"""

import json
import logging
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from sqlalchemy import create_engine, select
from sqlalchemy.orm import scoped_session, sessionmaker

from divrate.model.errors import DivrateError
from divrate.persistence.models import Base, Run, RunMetric, SweepPoint
from divrate.regselect.sweep import AlphaSweep


logger = logging.getLogger(__name__)

# Constants
DEFAULT_DB_NAME = "divrate.db"
RUN_STATUSES = ("running", "completed", "failed")


class LedgerError(DivrateError):
    """Base exception for ledger database errors."""


@dataclass
class RunRecord:
    """Run row as plain data.

    Attributes:
        run_id: Unique run identifier
        command: CLI command name
        started: Start timestamp (UTC, ISO 8601)
        finished: End timestamp (None while running)
        status: running, completed or failed
        exit_code: Process exit code once finished
        config: Run configuration
        error: Error message of a failed run
    """

    run_id: int
    command: str
    started: str
    finished: Optional[str] = None
    status: str = "running"
    exit_code: Optional[int] = None
    config: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _to_record(run: Run) -> RunRecord:
    return RunRecord(
        run_id=run.run_id,
        command=run.command,
        started=run.started,
        finished=run.finished,
        status=run.status,
        exit_code=run.exit_code,
        config=json.loads(run.config) if run.config else None,
        error=run.error,
    )


class RunLedger:
    """Manage the run ledger database.

    Attributes:
        db_path: Path to SQLite database file
        engine: SQLAlchemy engine
        Session: Scoped session factory
    """

    def __init__(self, db_path: str = DEFAULT_DB_NAME) -> None:
        self.db_path = str(db_path)

        db_parent = Path(self.db_path).parent
        if db_parent != Path():
            db_parent.mkdir(parents=True, exist_ok=True)

        self.engine = create_engine(
            f"sqlite:///{self.db_path}",
            connect_args={"check_same_thread": False},
            echo=False,
        )
        self.Session = scoped_session(sessionmaker(bind=self.engine))

        try:
            Base.metadata.create_all(self.engine)
            logger.debug(f"Ledger initialized at {self.db_path}")
        except Exception as exc:
            msg = f"Failed to initialize ledger: {exc}"
            logger.error(msg)
            raise LedgerError(msg) from exc

    def start_run(self, command: str, config: Optional[Mapping[str, Any]] = None) -> int:
        """Create a running Run row.

        Returns:
            Run ID

        Raises:
            LedgerError: If the row cannot be written
        """
        session = self.Session()
        try:
            run = Run(
                command=command,
                started=_now(),
                status="running",
                config=json.dumps(config, sort_keys=True, default=str) if config else None,
            )
            session.add(run)
            session.commit()
            run_id = run.run_id
            logger.debug(f"Started ledger run {run_id} ({command})")
            return run_id
        except Exception as exc:
            session.rollback()
            raise LedgerError(f"Failed to start run: {exc}") from exc
        finally:
            session.close()

    def finish_run(
        self, run_id: int, status: str, exit_code: int, error: Optional[str] = None
    ) -> None:
        """Mark a run finished.

        Raises:
            LedgerError: If the status is unknown or the run does not exist
        """
        if status not in RUN_STATUSES:
            raise LedgerError(f"Unknown run status '{status}'")

        session = self.Session()
        try:
            run = session.get(Run, run_id)
            if run is None:
                raise LedgerError(f"Run {run_id} not found")
            run.finished = _now()
            run.status = status
            run.exit_code = exit_code
            run.error = error
            session.commit()
        except LedgerError:
            session.rollback()
            raise
        except Exception as exc:
            session.rollback()
            raise LedgerError(f"Failed to finish run {run_id}: {exc}") from exc
        finally:
            session.close()

    def record_metrics(self, run_id: int, metrics: Mapping[str, float]) -> None:
        """Store named scalar results of a run."""
        session = self.Session()
        try:
            for name, value in metrics.items():
                session.add(RunMetric(run_id=run_id, name=name, value=float(value)))
            session.commit()
        except Exception as exc:
            session.rollback()
            raise LedgerError(f"Failed to record metrics for run {run_id}: {exc}") from exc
        finally:
            session.close()

    def record_sweep(self, run_id: int, sweep: AlphaSweep) -> None:
        """Store every α of a sweep, failed ones with their reason."""
        session = self.Session()
        method = sweep.method.value
        try:
            for alpha, residual, ratio, norm in zip(
                sweep.alphas, sweep.residuals, sweep.ratios, sweep.solution_norms
            ):
                session.add(
                    SweepPoint(
                        run_id=run_id,
                        method=method,
                        alpha=alpha,
                        residual=residual,
                        ratio=ratio,
                        solution_norm=norm,
                    )
                )
            for alpha, reason in sorted(sweep.failures.items()):
                session.add(SweepPoint(run_id=run_id, method=method, alpha=alpha, failure=reason))
            session.commit()
        except Exception as exc:
            session.rollback()
            raise LedgerError(f"Failed to record sweep for run {run_id}: {exc}") from exc
        finally:
            session.close()

    def get_run(self, run_id: int) -> Optional[RunRecord]:
        session = self.Session()
        try:
            run = session.get(Run, run_id)
            return _to_record(run) if run else None
        finally:
            session.close()

    def list_runs(self, limit: int = 20) -> List[RunRecord]:
        """Most recent runs first."""
        session = self.Session()
        try:
            stmt = select(Run).order_by(Run.run_id.desc()).limit(limit)
            return [_to_record(run) for run in session.execute(stmt).scalars()]
        finally:
            session.close()

    def latest_run(self) -> Optional[RunRecord]:
        runs = self.list_runs(limit=1)
        return runs[0] if runs else None

    def get_metrics(self, run_id: int) -> Dict[str, float]:
        session = self.Session()
        try:
            stmt = select(RunMetric).where(RunMetric.run_id == run_id).order_by(RunMetric.metric_id)
            return {metric.name: metric.value for metric in session.execute(stmt).scalars()}
        finally:
            session.close()

    def get_sweep(self, run_id: int) -> List[Dict[str, Any]]:
        session = self.Session()
        try:
            stmt = (
                select(SweepPoint)
                .where(SweepPoint.run_id == run_id)
                .order_by(SweepPoint.method, SweepPoint.alpha)
            )
            return [
                {
                    "method": point.method,
                    "alpha": point.alpha,
                    "residual": point.residual,
                    "ratio": point.ratio,
                    "solution_norm": point.solution_norm,
                    "failure": point.failure,
                }
                for point in session.execute(stmt).scalars()
            ]
        finally:
            session.close()

    def generate_summary(self, run_id: int) -> Dict[str, Any]:
        record = self.get_run(run_id)
        if record is None:
            return {}
        summary = asdict(record)
        summary["metrics"] = self.get_metrics(run_id)
        summary["sweep"] = self.get_sweep(run_id)
        return summary

    def export_report(self, run_id: int, format: str = "text") -> str:
        """Export a run report.

        Args:
            run_id: Run ID
            format: Output format (json or text)

        Returns:
            Report string

        Raises:
            LedgerError: If the run does not exist or the format is unknown
        """
        summary = self.generate_summary(run_id)
        if not summary:
            raise LedgerError(f"Run {run_id} not found")

        if format == "json":
            return json.dumps(summary, indent=2, sort_keys=True)
        if format != "text":
            raise LedgerError(f"Unknown report format '{format}'")

        report = []
        report.append("=" * 70)
        report.append("DIVISION RATE CALIBRATION REPORT")
        report.append("=" * 70)
        report.append(f"\nRun ID: {summary['run_id']}")
        report.append(f"Command: {summary['command']}")
        report.append(f"Status: {summary['status']} (exit code {summary['exit_code']})")
        report.append(f"Started: {summary['started']}")
        report.append(f"Finished: {summary['finished'] or '-'}")
        if summary["error"]:
            report.append(f"Error: {summary['error']}")

        if summary["metrics"]:
            report.append("\nResults:")
            for name, value in summary["metrics"].items():
                report.append(f"  {name}: {value:.6g}")

        if summary["sweep"]:
            report.append("\n" + "-" * 70)
            report.append(f"{'method':8s} {'alpha':>12s} {'residual':>14s} {'ratio':>14s}")
            report.append("-" * 70)
            for point in summary["sweep"]:
                if point["failure"]:
                    report.append(f"{point['method']:8s} {point['alpha']:12.6g}  failed: {point['failure']}")
                    continue
                report.append(
                    f"{point['method']:8s} {point['alpha']:12.6g} "
                    f"{point['residual']:14.6g} {point['ratio']:14.6g}"
                )

        report.append("\n" + "=" * 70)
        return "\n".join(report)

    def close(self) -> None:
        """Close database connections."""
        try:
            self.Session.remove()
            self.engine.dispose()
            logger.debug("Ledger connections closed")
        except Exception as exc:
            logger.error(f"Error closing ledger: {exc}")
