"""Command-line interface: exit codes, artifacts, output text."""

import json
import os
import subprocess
import sys

import pytest

from mixednash import harness
from mixednash.cli import main


def _write(tmp_path, name, doc):
    path = os.path.join(tmp_path, name)
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return path


def _run_doc(csv_path=None):
    doc = {
        "game": {"family": "quadratic", "n_i": 2, "seed": 1},
        "method": {
            "name": "mcgni",
            "iterations": 4,
            "batch": 8,
            "eval_batch": 16,
            "latent_dim": 2,
            "gen_kind": "constant",
        },
    }
    if csv_path is not None:
        doc["output"] = {"csv": csv_path}
    return doc


def test_solve_writes_csv_and_reports(tmp_path, capsys):
    csv_path = os.path.join(tmp_path, "run.csv")
    cfg = _write(tmp_path, "run.json", _run_doc(csv_path))
    assert main(["solve", cfg]) == 0
    out = capsys.readouterr().out
    assert "method=mcgni family=quadratic" in out
    assert "diverged=false" in out
    assert "local_regret=" in out
    rows = harness.read_metrics_csv(csv_path)
    assert len(rows) == 5
    # elapsed_ms is stripped so identical configs give identical bytes
    assert all(r.elapsed_ms is None for r in rows)


def test_solve_without_output_section(tmp_path, capsys):
    cfg = _write(tmp_path, "run.json", _run_doc())
    assert main(["solve", cfg]) == 0
    assert "metrics written" not in capsys.readouterr().out


def test_solve_rejects_suite_config(tmp_path, capsys):
    cfg = _write(tmp_path, "suite.json", {"suite": {"family": "quadratic"}})
    assert main(["solve", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_bench_rejects_run_config(tmp_path, capsys):
    cfg = _write(tmp_path, "run.json", _run_doc())
    assert main(["bench", cfg]) == 2
    assert "config error" in capsys.readouterr().err


def test_bench_writes_summary(tmp_path, capsys):
    outdir = os.path.join(tmp_path, "bench_out")
    doc = {
        "suite": {
            "family": "blotto",
            "sizes": [2],
            "instances": 2,
            "methods": ["gradgni", "sga"],
            "output_dir": outdir,
        },
        "method_defaults": {"iterations": 3},
    }
    cfg = _write(tmp_path, "suite.json", doc)
    assert main(["bench", cfg]) == 0
    out = capsys.readouterr().out
    assert "blotto size=2 gradgni: mean=" in out
    assert "blotto size=2 sga: mean=" in out
    summary = json.load(open(os.path.join(outdir, "summary.json")))
    assert len(summary["cells"]) == 2
    assert len(os.listdir(outdir)) == 5  # 4 run CSVs + summary.json


def test_missing_config_file_is_io_error(tmp_path, capsys):
    assert main(["solve", os.path.join(tmp_path, "nope.json")]) == 2
    assert "I/O error" in capsys.readouterr().err


def test_malformed_json_is_config_error(tmp_path, capsys):
    path = os.path.join(tmp_path, "bad.json")
    with open(path, "w") as fh:
        fh.write("{not json")
    assert main(["solve", path]) == 2
    assert "config error" in capsys.readouterr().err


def test_unwritable_csv_is_io_error(tmp_path, capsys):
    csv_path = os.path.join(tmp_path, "no", "such", "dir", "run.csv")
    cfg = _write(tmp_path, "run.json", _run_doc(csv_path))
    assert main(["solve", cfg]) == 2
    assert "I/O error" in capsys.readouterr().err


def test_check_subcommand_passes(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out
    assert "[FAIL]" not in out


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "run.json", _run_doc())
    proc = subprocess.run(
        [sys.executable, "-m", "mixednash", "solve", cfg],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "final:" in proc.stdout
