"""End-to-end tests of the divrate command line."""

import argparse
import json

import pytest

from divrate.cli import create_parser, main, parse_alphas
from divrate.ingest import parse_histogram, read_density_csv, read_result_csv
from divrate.persistence import RunLedger


SMALL = ["--n-points", "97"]
MEDIUM = ["--n-points", "129"]


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def histogram(workdir):
    assert main(["synth", *MEDIUM, "--output-dir", "data", "--no-ledger"]) == 0
    return workdir / "data" / "histogram.csv"


def ledger_runs(path):
    ledger = RunLedger(str(path))
    try:
        return ledger.list_runs()
    finally:
        ledger.close()


def run_metrics(path):
    ledger = RunLedger(str(path))
    try:
        return ledger.get_metrics(ledger.latest_run().run_id)
    finally:
        ledger.close()


def test_no_command_prints_help(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().out


def test_bad_alpha_list_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        create_parser().parse_args(["sweep", "--alphas", "0.1,big"])
    assert excinfo.value.code == 2


def test_init_config(workdir, capsys):
    assert main(["init-config"]) == 0
    assert (workdir / "divrate.yaml").exists()
    assert main(["init-config"]) == 1
    assert "already exists" in capsys.readouterr().out
    assert main(["init-config", "--force"]) == 0
    assert main(["init-config", "-o", "other.yaml"]) == 0
    assert (workdir / "other.yaml").read_text(encoding="utf-8").startswith("# divrate configuration")


def test_eigen_writes_profile_and_records_run(workdir, capsys):
    assert main(["eigen", *SMALL, "--output-dir", "out"]) == 0
    density = read_density_csv(workdir / "out" / "N.csv")
    assert density.grid.n_points == 97
    assert "Malthus parameter" in capsys.readouterr().out

    runs = ledger_runs(workdir / "out" / "divrate.db")
    assert [(run.command, run.status, run.exit_code) for run in runs] == [("eigen", "completed", 0)]

    assert main(["history", "--output-dir", "out"]) == 0
    assert "eigen" in capsys.readouterr().out

    assert main(["report", "--output-dir", "out", "--format", "json", "-o", "report.json"]) == 0
    summary = json.loads((workdir / "report.json").read_text(encoding="utf-8"))
    assert summary["metrics"]["lambda0"] == pytest.approx(1.0, abs=0.1)
    assert summary["config"]["grid"]["n_points"] == 97


def test_no_ledger_flag(workdir):
    assert main(["eigen", *SMALL, "--output-dir", "out", "--no-ledger"]) == 0
    assert not (workdir / "out" / "divrate.db").exists()
    assert main(["history", "--output-dir", "out"]) == 1


def test_degenerate_rate_exit_code(workdir):
    assert main(["eigen", *SMALL, "--rate", "0", "--output-dir", "out"]) == 6
    runs = ledger_runs(workdir / "out" / "divrate.db")
    assert runs[0].status == "failed"
    assert runs[0].exit_code == 6
    assert runs[0].error


def test_calibrate_needs_input():
    assert main(["calibrate"]) == 2


def test_calibrate_missing_file(workdir):
    assert main(["calibrate", "--input", "missing.csv", "--output-dir", "out"]) == 2


def test_doubling_lambda_needs_metadata(workdir):
    path = workdir / "bare.csv"
    path.write_text("volume,count\n0.5,1\n1.0,3\n1.5,2\n2.0,1\n2.5,0.2\n", encoding="utf-8")
    code = main(["calibrate", "--input", str(path), "--lambda-source", "doubling", "--no-ledger"])
    assert code == 4


def test_simulate(workdir):
    assert main(["simulate", *SMALL, "--t-max", "1", "--output-dir", "out", "--no-ledger"]) == 0
    assert (workdir / "out" / "trajectory.csv").exists()
    assert (workdir / "out" / "convergence.csv").exists()


def test_synth_writes_parseable_histogram(workdir):
    args = ["synth", *MEDIUM, "--dataset", "fast-20min", "--channels", "32", "--output-dir", "out"]
    assert main([*args, "--no-ledger"]) == 0
    histogram = parse_histogram(workdir / "out" / "histogram.csv")
    assert histogram.volumes.size == 32
    assert histogram.meta.doubling_time == pytest.approx(20.0)
    assert histogram.meta.label == "fast-20min"
    assert (workdir / "out" / "B_true.csv").exists()


def test_calibrate_synthetic_histogram(workdir, histogram):
    assert main(["calibrate", "--input", str(histogram), *MEDIUM, "--output-dir", "cal"]) == 0
    report = (workdir / "cal" / "report.txt").read_text(encoding="utf-8")
    assert "method: qr" in report
    assert "alpha: 0.1" in report
    rate, profile, footer = read_result_csv(workdir / "cal" / "B.csv")
    assert rate.grid.n_points == 129
    assert footer["growth"] == "linear"
    assert profile.grid.same_as(rate.grid)


def test_sweep_selects_alpha(workdir, histogram):
    args = ["sweep", "--input", str(histogram), *MEDIUM, "--alphas", "0.05,0.1,0.2", "--output-dir", "sw"]
    assert main(args) == 0
    assert (workdir / "sw" / "sweep.csv").exists()
    assert "flat:" in (workdir / "sw" / "report.txt").read_text(encoding="utf-8")

    runs = ledger_runs(workdir / "sw" / "divrate.db")
    ledger = RunLedger(str(workdir / "sw" / "divrate.db"))
    try:
        points = ledger.get_sweep(runs[0].run_id)
        metrics = ledger.get_metrics(runs[0].run_id)
    finally:
        ledger.close()
    assert [point["alpha"] for point in points] == [0.05, 0.1, 0.2]
    assert metrics["alpha_star"] in (0.05, 0.1, 0.2)


@pytest.mark.slow
def test_roundtrip_synthetic_then_from_file(workdir):
    args = ["roundtrip", "--rate", "1", *SMALL, "--alpha", "0.1", "--output-dir", "rt", "--no-ledger"]
    assert main(args) == 0
    for name in ("B_true.csv", "N_true.csv", "N_noisy.csv", "B.csv", "N_roundtrip.csv"):
        assert (workdir / "rt" / name).exists()

    assert main(["roundtrip", "--input", "rt/B.csv", "--output-dir", "rt2"]) == 0
    assert (workdir / "rt2" / "N_roundtrip.csv").exists()
    metrics = run_metrics(workdir / "rt2" / "divrate.db")
    assert metrics["l1_distance_data"] >= 0.0
    assert "l1_distance" in metrics


@pytest.mark.slow
def test_roundtrip_compares_with_calibration_data(workdir, histogram, capsys):
    args = ["calibrate", "--input", str(histogram), *MEDIUM, "--method", "filter", "--alpha", "0.2"]
    assert main([*args, "--output-dir", "cal", "--no-ledger"]) == 0
    capsys.readouterr()

    assert main(["roundtrip", "--input", "cal/B.csv", "--output-dir", "check"]) == 0
    assert "L1(N_data, N_out)" in capsys.readouterr().out
    metrics = run_metrics(workdir / "check" / "divrate.db")
    assert metrics["l1_distance_data"] >= 0.0

    (workdir / "lone").mkdir()
    (workdir / "lone" / "B.csv").write_bytes((workdir / "cal" / "B.csv").read_bytes())
    assert main(["roundtrip", "--input", "lone/B.csv", "--output-dir", "check2"]) == 0
    assert "l1_distance_data" not in run_metrics(workdir / "check2" / "divrate.db")


def test_geometric_alpha_grid():
    alphas = parse_alphas("0.2:0.4:10")
    assert len(alphas) == 10
    assert alphas[0] == pytest.approx(0.2)
    assert alphas[-1] == pytest.approx(0.4)
    steps = [later / earlier for earlier, later in zip(alphas, alphas[1:])]
    assert steps == pytest.approx([2 ** (1 / 9)] * 9)


@pytest.mark.parametrize("text", ["0.4:0.2:5", "0:1:5", "0.1:1", "0.1:1:1", "a:1:3"])
def test_bad_geometric_alpha_grid(text):
    with pytest.raises(argparse.ArgumentTypeError):
        parse_alphas(text)


def test_sweep_flags_flat_ratio_curve_on_plateau_dataset(workdir):
    assert main(["synth", *MEDIUM, "--dataset", "plateau", "--output-dir", "data", "--no-ledger"]) == 0
    args = ["sweep", "--input", "data/histogram.csv", *MEDIUM, "--alphas", "0.2:0.4:10"]
    assert main([*args, "--output-dir", "sw", "--no-ledger"]) == 0
    report = (workdir / "sw" / "report.txt").read_text(encoding="utf-8")
    assert "flat: True" in report


def test_synth_and_calibrate_are_byte_identical_across_runs(workdir):
    for run in ("a", "b"):
        synth = ["synth", *MEDIUM, "--dataset", "slow-54min", "--output-dir", f"data-{run}"]
        assert main([*synth, "--no-ledger"]) == 0
        calibrate = ["calibrate", "--input", f"data-{run}/histogram.csv", *MEDIUM]
        assert main([*calibrate, "--output-dir", f"cal-{run}", "--no-ledger"]) == 0

    for folder, name in [
        ("data", "histogram.csv"),
        ("data", "B_true.csv"),
        ("data", "N_true.csv"),
        ("cal", "B.csv"),
        ("cal", "N.csv"),
    ]:
        first = (workdir / f"{folder}-a" / name).read_bytes()
        assert first == (workdir / f"{folder}-b" / name).read_bytes(), name
