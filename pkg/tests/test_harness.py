"""Benchmark harness: config parsing, CSV/JSON artifacts, suite execution."""

import json
import os

import numpy as np
import pytest

from mixednash import harness, optim
from mixednash.harness import ConfigError


def test_metrics_csv_round_trip(tmp_path):
    rows = [
        optim.MetricsRow(0, 0.123456789012345678, None, 4.0, 12.5),
        optim.MetricsRow(1, 1e-300, 0.1 + 0.2, None, 0.0),
        optim.MetricsRow(2, float(np.pi), 3.0, 2.5e-17, 1.125),
    ]
    path = os.path.join(tmp_path, "m.csv")
    harness.write_metrics_csv(rows, path)
    with open(path) as fh:
        assert fh.readline().strip() == harness.CSV_HEADER
    back = harness.read_metrics_csv(path)
    assert back == rows  # .17g formatting round-trips doubles exactly


def test_strip_elapsed():
    rows = [optim.MetricsRow(0, 1.0, None, None, 3.5)]
    bare = harness.strip_elapsed(rows)
    assert bare[0].elapsed_ms is None
    assert bare[0].local_regret == 1.0
    assert rows[0].elapsed_ms == 3.5


def test_parse_run_config_defaults():
    spec = harness.parse_config('{"game": {"family": "quadratic"}}')
    assert isinstance(spec, harness.RunSpec)
    assert spec.game.family == "quadratic"
    assert spec.game.n_i == 3
    assert spec.solver.method == "mcgni"
    assert spec.solver.lam == 1e-3
    assert spec.solver.iterations == 2000
    assert spec.csv_path is None


def test_parse_run_config_family_method_defaults():
    # baselines run at their own documented radii unless the user overrides
    spec = harness.parse_config(
        '{"game": {"family": "quadratic"}, "method": {"name": "sga"}}'
    )
    assert spec.solver.lam == 1.0
    spec = harness.parse_config(
        '{"game": {"family": "blotto"}, "method": {"name": "gradgni"}}'
    )
    assert spec.solver.lam == 1e-3
    spec = harness.parse_config(
        '{"game": {"family": "quadratic"}, "method": {"name": "gradgni"}}'
    )
    assert spec.solver.lam == 0.2
    # explicit user value beats the family default
    spec = harness.parse_config(
        '{"game": {"family": "quadratic"}, "method": {"name": "gradgni", "lambda": 0.05}}'
    )
    assert spec.solver.lam == 0.05
    # the mixed solver keeps the global radius everywhere but steps hotter
    # on blotto's small cost scale
    spec = harness.parse_config(
        '{"game": {"family": "quadratic"}, "method": {"name": "mcgni"}}'
    )
    assert spec.solver.lam == 1e-3
    assert spec.solver.rho == 1e-2
    spec = harness.parse_config(
        '{"game": {"family": "blotto"}, "method": {"name": "mcgni"}}'
    )
    assert spec.solver.lam == 1e-3
    assert spec.solver.rho == 1.0


def test_parse_suite_layers_method_defaults():
    doc = {
        "suite": {"family": "quadratic", "sizes": [3], "instances": 2},
        "method_defaults": {"iterations": 5, "batch": 8, "eval_batch": 16},
        "overrides": {"sga": {"lambda": 0.7}},
    }
    suite = harness.parse_config(json.dumps(doc))
    assert isinstance(suite, harness.SuiteConfig)
    assert suite.methods == ("mcgni", "gradgni", "sga")
    assert suite.templates["mcgni"].lam == 1e-3
    assert suite.templates["gradgni"].lam == 0.2  # family default survives
    assert suite.templates["sga"].lam == 0.7  # override wins over family default
    assert all(t.iterations == 5 for t in suite.templates.values())
    # shared method_defaults sit between family defaults and overrides
    doc["method_defaults"]["lambda"] = 0.01
    suite = harness.parse_config(json.dumps(doc))
    assert suite.templates["gradgni"].lam == 0.01
    assert suite.templates["sga"].lam == 0.7


def test_parse_rejects_unknown_and_malformed_keys():
    with pytest.raises(ConfigError):
        harness.parse_config("not json")
    with pytest.raises(ConfigError):
        harness.parse_config("[1, 2]")
    with pytest.raises(ConfigError):
        harness.parse_config("{}")
    with pytest.raises(ConfigError, match="unknown"):
        harness.parse_config('{"game": {"family": "quadratic", "n": 3}}')
    with pytest.raises(ConfigError, match="family"):
        harness.parse_config('{"game": {"family": "pursuit"}}')
    with pytest.raises(ConfigError):
        harness.parse_config('{"game": {"family": "quadratic"}, "method": {"kappa": 1.5}}')
    with pytest.raises(ConfigError):
        harness.parse_config('{"game": {"family": "quadratic"}, "method": {"lambda": -1}}')
    with pytest.raises(ConfigError, match="m"):
        # blotto games take m, not n_i
        harness.parse_config('{"game": {"family": "blotto", "n_i": 4}}')
    with pytest.raises(ConfigError):
        harness.parse_config('{"suite": {"family": "quadratic", "sizes": []}}')
    with pytest.raises(ConfigError, match="suite_seed"):
        # per-run seeds are derived; setting them on a suite is an error
        harness.parse_config(
            '{"suite": {"family": "quadratic"}, "method_defaults": {"init_seed": 7}}'
        )
    with pytest.raises(ConfigError, match="not in suite.methods"):
        harness.parse_config(
            '{"suite": {"family": "quadratic", "methods": ["mcgni"]},'
            ' "overrides": {"sga": {}}}'
        )
    with pytest.raises(ConfigError):
        harness.parse_config('{"suite": {"family": "quadratic", "methods": ["mcgni", "mcgni"]}}')


def test_emit_parse_round_trip_run():
    text = (
        '{"game": {"family": "blotto", "m": 4, "seed": 3},'
        ' "method": {"name": "gradgni", "lambda": 0.05, "iterations": 7},'
        ' "output": {"csv": "out.csv"}}'
    )
    spec = harness.parse_config(text)
    again = harness.parse_config(harness.emit_config(spec))
    assert again == spec
    assert again.csv_path == "out.csv"


def test_emit_parse_round_trip_suite():
    doc = {
        "suite": {
            "family": "multiquadratic",
            "sizes": [2, 3],
            "instances": 4,
            "suite_seed": 9,
            "methods": ["mcgni", "sga"],
            "num_players": 3,
        },
        "method_defaults": {"iterations": 6},
    }
    suite = harness.parse_config(json.dumps(doc))
    again = harness.parse_config(harness.emit_config(suite))
    assert again == suite
    # emitted configs are deterministic texts
    assert harness.emit_config(suite) == harness.emit_config(again)


def test_suite_game_families_and_dist_cycling():
    suite = harness.parse_config(
        '{"suite": {"family": "multiquadratic", "num_players": 3}}'
    )
    dists = [harness.suite_game(suite, 2, j).payload.dist_id for j in range(6)]
    assert dists == list(harness.GAMUT_DISTRIBUTIONS) + ["uniform01"]
    pinned = harness.parse_config(
        '{"suite": {"family": "multiquadratic", "num_players": 3, "dist_id": "normal"}}'
    )
    assert harness.suite_game(pinned, 2, 4).payload.dist_id == "normal"

    quad = harness.parse_config('{"suite": {"family": "quadratic", "suite_seed": 5}}')
    g = harness.suite_game(quad, 3, 2)
    assert g.kind == "quadratic"
    assert g.seed == 7  # suite_seed + instance
    blotto = harness.parse_config('{"suite": {"family": "blotto"}}')
    assert harness.suite_game(blotto, 4, 0).payload.m == 4


def test_cell_seeds_are_distinct_and_stable():
    seen = set()
    for size in (2, 3):
        for inst in range(3):
            for mi in range(3):
                seeds = harness.cell_seeds(0, size, inst, mi)
                assert seeds not in seen
                seen.add(seeds)
    assert harness.cell_seeds(0, 3, 1, 2) == harness.cell_seeds(0, 3, 1, 2)


def _tiny_suite_doc(outdir):
    return {
        "suite": {
            "family": "quadratic",
            "sizes": [2],
            "instances": 2,
            "methods": ["mcgni", "gradgni"],
            "output_dir": outdir,
        },
        "method_defaults": {
            "iterations": 4,
            "batch": 8,
            "eval_batch": 16,
            "hvp_eps": 1e-4,
        },
        "overrides": {"mcgni": {"latent_dim": 2}},
    }


def test_run_suite_end_to_end(tmp_path):
    outdir = os.path.join(tmp_path, "bench")
    suite = harness.parse_config(json.dumps(_tiny_suite_doc(outdir)))
    table = harness.run_suite(suite)
    assert set(table.cells) == {(2, "mcgni"), (2, "gradgni")}
    for cell in table.cells.values():
        assert cell.n == 2
        assert np.isfinite(cell.mean) and np.isfinite(cell.std)
        assert cell.diverged == 0
    paths = sorted(os.listdir(outdir))
    assert paths == [
        "quadratic_size2_inst000_gradgni.csv",
        "quadratic_size2_inst000_mcgni.csv",
        "quadratic_size2_inst001_gradgni.csv",
        "quadratic_size2_inst001_mcgni.csv",
    ]
    rows = harness.read_metrics_csv(os.path.join(outdir, paths[0]))
    assert len(rows) == 5
    # the summary mean is the average of the final recorded regrets
    finals = [
        harness.read_metrics_csv(
            harness.run_csv_path(suite, 2, j, "mcgni")
        )[-1].local_regret
        for j in range(2)
    ]
    assert table.cells[(2, "mcgni")].mean == pytest.approx(float(np.mean(finals)), rel=1e-15)

    doc = harness.summary_to_dict(table)
    assert {c["method"] for c in doc["cells"]} == {"mcgni", "gradgni"}
    assert doc["suite"]["suite"]["family"] == "quadratic"
    sp = os.path.join(tmp_path, "summary.json")
    harness.write_summary_json(table, sp)
    assert json.load(open(sp)) == doc


def test_suite_rerun_is_byte_identical(tmp_path):
    outdir = os.path.join(tmp_path, "bench")
    suite = harness.parse_config(json.dumps(_tiny_suite_doc(outdir)))

    def run_once():
        table = harness.run_suite(suite)
        sp = os.path.join(tmp_path, "summary.json")
        harness.write_summary_json(table, sp)
        files = {}
        for name in sorted(os.listdir(outdir)):
            files[name] = open(os.path.join(outdir, name), "rb").read()
        files["summary.json"] = open(sp, "rb").read()
        return files

    first = run_once()
    second = run_once()
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], name
