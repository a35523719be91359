"""Tests for the SQLite run ledger."""

import json
import math

import pytest

from divrate.inverse import ReconstructionMethod
from divrate.persistence import LedgerError, RunLedger
from divrate.regselect import AlphaSweep


@pytest.fixture
def ledger(tmp_path):
    ledger = RunLedger(str(tmp_path / "divrate.db"))
    yield ledger
    ledger.close()


def make_sweep():
    alphas = [0.1, 0.2]
    residuals = [1e-3, 4e-3]
    return AlphaSweep(
        method=ReconstructionMethod.QUASI_REVERSIBILITY,
        alphas=alphas,
        residuals=residuals,
        ratios=[r / math.sqrt(a) for a, r in zip(alphas, residuals)],
        solution_norms=[2.0, 1.5],
        failures={0.4: "march overflowed"},
    )


def test_start_and_finish_run(ledger):
    run_id = ledger.start_run("eigen", {"grid": {"n_points": 97}})
    record = ledger.get_run(run_id)
    assert record.status == "running"
    assert record.finished is None
    assert record.config == {"grid": {"n_points": 97}}

    ledger.finish_run(run_id, "completed", 0)
    record = ledger.get_run(run_id)
    assert record.status == "completed"
    assert record.exit_code == 0
    assert record.finished is not None


def test_failed_run_keeps_error(ledger):
    run_id = ledger.start_run("calibrate")
    ledger.finish_run(run_id, "failed", 4, error="Histogram has no doubling time")
    record = ledger.get_run(run_id)
    assert record.config is None
    assert record.error == "Histogram has no doubling time"
    assert "Error: Histogram has no doubling time" in ledger.export_report(run_id)


def test_finish_rejects_bad_input(ledger):
    run_id = ledger.start_run("eigen")
    with pytest.raises(LedgerError, match="Unknown run status"):
        ledger.finish_run(run_id, "paused", 0)
    with pytest.raises(LedgerError, match="not found"):
        ledger.finish_run(run_id + 100, "completed", 0)


def test_metrics_round_trip(ledger):
    run_id = ledger.start_run("calibrate")
    ledger.record_metrics(run_id, {"lambda": 0.0128, "alpha": 0.1, "residual": 3e-4})
    assert ledger.get_metrics(run_id) == {"lambda": 0.0128, "alpha": 0.1, "residual": 3e-4}
    assert ledger.get_metrics(run_id + 1) == {}


def test_sweep_round_trip(ledger):
    run_id = ledger.start_run("sweep")
    ledger.record_sweep(run_id, make_sweep())
    points = ledger.get_sweep(run_id)
    assert [point["alpha"] for point in points] == [0.1, 0.2, 0.4]
    assert all(point["method"] == "qr" for point in points)
    assert points[0]["residual"] == 1e-3
    assert points[1]["solution_norm"] == 1.5
    assert points[2]["residual"] is None
    assert points[2]["failure"] == "march overflowed"


def test_list_and_latest_runs(ledger):
    assert ledger.latest_run() is None
    ids = [ledger.start_run(command) for command in ("eigen", "simulate", "synth")]
    runs = ledger.list_runs()
    assert [run.run_id for run in runs] == ids[::-1]
    assert [run.command for run in ledger.list_runs(limit=2)] == ["synth", "simulate"]
    assert ledger.latest_run().run_id == ids[-1]
    assert ledger.get_run(ids[-1] + 1) is None


def test_text_report(ledger):
    run_id = ledger.start_run("sweep")
    ledger.record_metrics(run_id, {"alpha_selected": 0.1})
    ledger.record_sweep(run_id, make_sweep())
    ledger.finish_run(run_id, "completed", 0)
    report = ledger.export_report(run_id)
    assert f"Run ID: {run_id}" in report
    assert "Command: sweep" in report
    assert "Status: completed (exit code 0)" in report
    assert "alpha_selected: 0.1" in report
    assert "failed: march overflowed" in report


def test_json_report(ledger):
    run_id = ledger.start_run("calibrate", {"regularization": {"method": "qr"}})
    ledger.record_metrics(run_id, {"lambda": 0.5})
    summary = json.loads(ledger.export_report(run_id, format="json"))
    assert summary["run_id"] == run_id
    assert summary["metrics"] == {"lambda": 0.5}
    assert summary["sweep"] == []
    assert summary["config"]["regularization"]["method"] == "qr"


def test_report_errors(ledger):
    run_id = ledger.start_run("eigen")
    with pytest.raises(LedgerError, match="Unknown report format"):
        ledger.export_report(run_id, format="html")
    with pytest.raises(LedgerError, match="not found"):
        ledger.export_report(run_id + 1)


def test_database_directory_is_created(tmp_path):
    ledger = RunLedger(str(tmp_path / "nested" / "runs" / "divrate.db"))
    try:
        ledger.start_run("eigen")
        assert (tmp_path / "nested" / "runs" / "divrate.db").exists()
    finally:
        ledger.close()
