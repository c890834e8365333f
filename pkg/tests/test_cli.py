import csv
import json

import pytest

from reactrisk.cli import main, snapshot_times
from reactrisk.riskmap import read_matrix_csv
from reactrisk.scenarios import build_scenario, run
from reactrisk.traceio import write_trace_csv


def test_calibrate_prints_reference(capsys):
    assert main(["calibrate"]) == 0
    out, err = capsys.readouterr()
    assert float(out) == pytest.approx(2320.2138418, rel=1e-9)
    assert err == ""


def test_scenario_writes_all_artifacts(tmp_path, capsys):
    out = tmp_path / "cf"
    assert main(["scenario", "CF", "--out", str(out)]) == 0
    assert capsys.readouterr().err == ""
    names = {p.name for p in out.iterdir()}
    assert {"trace.csv", "assessments.jsonl", "metrics.json"} <= names
    matrices = sorted(n for n in names if n.startswith("matrix_"))
    assert "matrix_4.00.csv" in matrices and "matrix_5.00.csv" in matrices
    meta, cells = read_matrix_csv(out / "matrix_5.00.csv")
    assert cells.shape == (80, 20) and meta["t"] == 5.0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["per_frame_records"] == len((out / "assessments.jsonl").read_text().splitlines())
    assert not any(p.name.startswith(".reactrisk-") for p in tmp_path.iterdir())


def test_scenario_cf_warning_detects_hazard(tmp_path):
    out = tmp_path / "cf"
    assert main(["scenario", "CF", "--mode", "warning", "--out", str(out)]) == 0
    assert json.loads((out / "metrics.json").read_text())["miss_rate"] == 0.0


def test_scenario_nominal_flag(tmp_path):
    out = tmp_path / "ic"
    assert main(["scenario", "IC", "--nominal", "--mode", "nowarning", "--out", str(out)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["nominal"] is True and metrics["nominal_runs"] == 1


def test_snapshot_times():
    assert snapshot_times(5.0, None) == [4.0, 5.0]
    assert snapshot_times(5.0, 7.3) == [4.0, 5.0, 7.3, 8.3]


def test_replay(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    tr = run(build_scenario("CF"))
    n = len(tr)
    write_trace_csv(trace, tr)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"io": {"frame_rate": 20.0}}))
    out = tmp_path / "replay"
    assert main(["replay", "--trace", str(trace), "--ego-id", "1", "--config", str(cfg), "--out", str(out)]) == 0
    assert capsys.readouterr().err == ""
    rows = list(csv.DictReader((out / "baselines.csv").open()))
    assert len(rows) == n
    assert "level_react" in rows[0]
    assert len((out / "assessments.jsonl").read_text().splitlines()) == n


def test_replay_missing_trace(tmp_path, capsys):
    assert main(["replay", "--trace", str(tmp_path / "missing.csv"), "--ego-id", "1"]) == 1
    assert "not found" in capsys.readouterr().err


def test_bad_config_exit_two(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"nope": 1}}))
    assert main(["calibrate", "--config", str(cfg)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_unknown_flag_exit_two(capsys):
    assert main(["bench", "--frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_scenario_exit_two(tmp_path):
    assert main(["scenario", "ZZ", "--out", str(tmp_path / "z")]) == 2
    assert not (tmp_path / "z").exists()


def test_bench_one_row_per_size(capsys):
    assert main(["bench", "--sizes", "0", "3", "--repetitions", "3"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 3
    assert out[1].split()[0] == "0" and out[2].split()[0] == "3"
