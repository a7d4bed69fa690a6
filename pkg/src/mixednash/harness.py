"""Benchmark harness: config documents, seeded suites, CSV/JSON artifacts.

Configuration is JSON with two top-level shapes.  A run config describes one
game and one method; a suite config describes a family sweep over sizes,
instances, and methods, reproducing the benchmark protocol (one game per
instance seed, every method on the same game, aggregate mean/std of the
final held-out local regret).

All artifacts are deterministic functions of the config: CSV floats use 17
significant digits (exact f64 round-trip) and the wall-time column is left
empty in files so reruns are byte-identical; in-memory metrics keep real
timings.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .games import (
    BLOTTO,
    GAMUT_DISTRIBUTIONS,
    MULTIQUADRATIC,
    QUADRATIC,
    GameInstance,
    gen_blotto,
    gen_gamut,
    gen_quadratic,
)
from .mcgni import EXACT, FIRST_ORDER, MCGNIConfig
from .optim import METHODS, MetricsRow, SolverConfig, run
from .pushforward import CONSTANT, NET

WORKER_ENV = "MIXEDNASH_WORKERS"
CSV_HEADER = "iteration,local_regret,grad_norm,snp_residual,elapsed_ms"

FAMILIES = (QUADRATIC, BLOTTO, MULTIQUADRATIC)


class ConfigError(ValueError):
    """Raised for malformed, mistyped, or unknown configuration content."""


# ---------------------------------------------------------------------------
# config documents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameSpec:
    """Declarative description of one game instance."""

    family: str
    seed: int = 0
    n_i: int = 3
    m: int = 3
    entry_dist: str = "uniform01"
    dist_id: str = "uniform01"
    num_players: int = 4

    def build(self) -> GameInstance:
        if self.family == QUADRATIC:
            return gen_quadratic(self.seed, self.n_i, self.entry_dist)
        if self.family == BLOTTO:
            return gen_blotto(self.seed, self.m)
        return gen_gamut(self.seed, self.num_players, self.n_i, self.dist_id)


@dataclass(frozen=True)
class RunSpec:
    """One solver bound to one game, plus optional artifact paths."""

    game: GameSpec
    solver: SolverConfig
    csv_path: str | None = None


@dataclass(frozen=True)
class SuiteConfig:
    """A benchmark sweep; per-method solver templates are fully resolved.

    Template seeds are placeholders: each (size, instance, method) cell
    derives its own init/batch/eval seeds from suite_seed, and the game for
    instance j uses seed suite_seed + j.  dist_id None (multiquadratic only)
    cycles the documented entry distributions per instance.
    """

    family: str
    sizes: tuple[int, ...] = (3,)
    instances: int = 10
    suite_seed: int = 0
    methods: tuple[str, ...] = METHODS
    output_dir: str = "bench_out"
    num_players: int = 4
    dist_id: str | None = None
    templates: dict[str, SolverConfig] = field(default_factory=dict)


_GAME_KEYS = {
    QUADRATIC: ("family", "seed", "n_i", "entry_dist"),
    BLOTTO: ("family", "seed", "m"),
    MULTIQUADRATIC: ("family", "seed", "n_i", "num_players", "dist_id"),
}

_METHOD_KEYS = (
    "name",
    "lambda",
    "rho",
    "kappa",
    "iterations",
    "batch",
    "grad_mode",
    "hvp_eps",
    "eval_batch",
    "gen_kind",
    "latent_dim",
    "init_seed",
    "batch_seed",
    "eval_seed",
)
_SEED_KEYS = ("init_seed", "batch_seed", "eval_seed")

_SUITE_KEYS = (
    "family",
    "sizes",
    "instances",
    "suite_seed",
    "methods",
    "output_dir",
    "num_players",
    "dist_id",
)

# Per-family method defaults, layered beneath method_defaults/overrides.
# Every method trains and reports at its own local radius: the mixed solver
# at 1e-3 (the generic default), gradGNI at the largest radius that keeps it
# stable per family, SGA at the unit radius of its adjustment term.  With a
# shared tiny radius the baselines' reported regret would collapse to the
# same scale as the mixed solver's and the benchmark would say nothing.
# Blotto costs are small (budgets are U(0,1) draws) and the regret objective
# scales with lambda, so the mixed solver needs a hotter step there to
# converge within the default iteration budget.
FAMILY_METHOD_DEFAULTS: dict[tuple[str, str], dict] = {
    (QUADRATIC, "gradgni"): {"lambda": 0.2},
    (MULTIQUADRATIC, "gradgni"): {"lambda": 0.2},
    (BLOTTO, "gradgni"): {"lambda": 1e-3},
    (QUADRATIC, "sga"): {"lambda": 1.0},
    (MULTIQUADRATIC, "sga"): {"lambda": 1.0},
    (BLOTTO, "sga"): {"lambda": 1.0},
    (BLOTTO, "mcgni"): {"rho": 1.0},
}


def _require_section(doc: dict, name: str) -> dict:
    sec = doc.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    return sec


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _get_int(sec: dict, key: str, default: int, where: str, minimum: int | None = None) -> int:
    v = sec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}, got {v}")
    return v


def _get_float(sec: dict, key: str, default: float, where: str) -> float:
    v = sec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _get_choice(sec: dict, key: str, default: str, where: str, choices) -> str:
    v = sec.get(key, default)
    if v not in choices:
        raise ConfigError(f"{where}.{key} must be one of {list(choices)}, got {v!r}")
    return v


def _parse_game(sec: dict) -> GameSpec:
    family = _get_choice(sec, "family", "", "game", FAMILIES)
    _reject_unknown(sec, _GAME_KEYS[family], f"game (family {family!r})")
    spec = GameSpec(
        family=family,
        seed=_get_int(sec, "seed", 0, "game", minimum=0),
        n_i=_get_int(sec, "n_i", 3, "game", minimum=1),
        m=_get_int(sec, "m", 3, "game", minimum=1),
        entry_dist=_get_choice(sec, "entry_dist", "uniform01", "game", GAMUT_DISTRIBUTIONS),
        num_players=_get_int(sec, "num_players", 4, "game", minimum=2),
        dist_id=_get_choice(sec, "dist_id", "uniform01", "game", GAMUT_DISTRIBUTIONS),
    )
    return spec


def _parse_method(sec: dict, where: str, allow_seeds: bool, name: str | None = None) -> SolverConfig:
    allowed = set(_METHOD_KEYS)
    if not allow_seeds:
        allowed -= set(_SEED_KEYS)
        allowed.discard("name")
        present = set(sec) & set(_SEED_KEYS)
        if present:
            raise ConfigError(
                f"{where} must not set {sorted(present)}; suite seeds derive from suite_seed"
            )
    _reject_unknown(sec, allowed, where)
    if name is None:
        name = _get_choice(sec, "name", "mcgni", where, METHODS)
    lam = _get_float(sec, "lambda", 1e-3, where)
    if not lam > 0:
        raise ConfigError(f"{where}.lambda must be > 0, got {lam}")
    rho = _get_float(sec, "rho", 1e-2, where)
    if not rho > 0:
        raise ConfigError(f"{where}.rho must be > 0, got {rho}")
    kappa = _get_float(sec, "kappa", 0.9, where)
    if not 0.0 <= kappa < 1.0:
        raise ConfigError(f"{where}.kappa must be in [0, 1), got {kappa}")
    hvp_eps = _get_float(sec, "hvp_eps", 1e-4, where)
    if not hvp_eps > 0:
        raise ConfigError(f"{where}.hvp_eps must be > 0, got {hvp_eps}")
    latent = sec.get("latent_dim", None)
    if latent is not None and (isinstance(latent, bool) or not isinstance(latent, int) or latent < 1):
        raise ConfigError(f"{where}.latent_dim must be null or an integer >= 1, got {latent!r}")
    mcfg = MCGNIConfig(
        lam=lam,
        batch=_get_int(sec, "batch", 128, where, minimum=1),
        grad_mode=_get_choice(sec, "grad_mode", EXACT, where, (EXACT, FIRST_ORDER)),
        hvp_eps=hvp_eps,
        eval_batch=_get_int(sec, "eval_batch", 1024, where, minimum=1),
    )
    return SolverConfig(
        method=name,
        lam=lam,
        rho=rho,
        kappa=kappa,
        iterations=_get_int(sec, "iterations", 2000, where, minimum=1),
        mcgni=mcfg,
        init_seed=_get_int(sec, "init_seed", 0, where, minimum=0),
        batch_seed=_get_int(sec, "batch_seed", 1, where, minimum=0),
        eval_seed=_get_int(sec, "eval_seed", 2, where, minimum=0),
        gen_kind=_get_choice(sec, "gen_kind", NET, where, (NET, CONSTANT)),
        latent_dim=latent,
    )


def _parse_suite(doc: dict) -> SuiteConfig:
    _reject_unknown(doc, ("suite", "method_defaults", "overrides"), "top level")
    sec = _require_section(doc, "suite")
    _reject_unknown(sec, _SUITE_KEYS, "suite")
    family = _get_choice(sec, "family", "", "suite", FAMILIES)
    sizes = sec.get("sizes", [3])
    if (
        not isinstance(sizes, list)
        or not sizes
        or any(isinstance(s, bool) or not isinstance(s, int) or s < 1 for s in sizes)
    ):
        raise ConfigError(f"suite.sizes must be a non-empty list of integers >= 1, got {sizes!r}")
    methods = sec.get("methods", list(METHODS))
    if not isinstance(methods, list) or not methods:
        raise ConfigError("suite.methods must be a non-empty list")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ConfigError(f"suite.methods contains unknown method(s): {bad}")
    if len(set(methods)) != len(methods):
        raise ConfigError("suite.methods contains duplicates")
    dist_id = sec.get("dist_id", None)
    if dist_id is not None and dist_id not in GAMUT_DISTRIBUTIONS:
        raise ConfigError(
            f"suite.dist_id must be null or one of {list(GAMUT_DISTRIBUTIONS)}, got {dist_id!r}"
        )
    output_dir = sec.get("output_dir", "bench_out")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError(f"suite.output_dir must be a non-empty string, got {output_dir!r}")

    defaults_sec = doc.get("method_defaults", {})
    if not isinstance(defaults_sec, dict):
        raise ConfigError("section 'method_defaults' must be an object")
    overrides_sec = doc.get("overrides", {})
    if not isinstance(overrides_sec, dict):
        raise ConfigError("section 'overrides' must be an object")
    bad = sorted(set(overrides_sec) - set(methods))
    if bad:
        raise ConfigError(f"overrides mention method(s) not in suite.methods: {bad}")
    templates = {}
    for m in methods:
        merged = dict(FAMILY_METHOD_DEFAULTS.get((family, m), {}))
        merged.update(defaults_sec)
        over = overrides_sec.get(m, {})
        if not isinstance(over, dict):
            raise ConfigError(f"overrides.{m} must be an object")
        merged.update(over)
        templates[m] = _parse_method(merged, f"method section for {m!r}", allow_seeds=False, name=m)
    return SuiteConfig(
        family=family,
        sizes=tuple(sizes),
        instances=_get_int(sec, "instances", 10, "suite", minimum=1),
        suite_seed=_get_int(sec, "suite_seed", 0, "suite", minimum=0),
        methods=tuple(methods),
        output_dir=output_dir,
        num_players=_get_int(sec, "num_players", 4, "suite", minimum=2),
        dist_id=dist_id,
        templates=templates,
    )


def parse_config(text: str) -> RunSpec | SuiteConfig:
    """Parse and validate a JSON config document.

    Presence of a "suite" section selects the suite shape; otherwise a
    "game" section is required.  Unknown keys anywhere are errors naming the
    offending keys; omitted keys take the documented defaults.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    if "suite" in doc:
        return _parse_suite(doc)
    if "game" not in doc:
        raise ConfigError("config needs a 'game' section (or a 'suite' section)")
    _reject_unknown(doc, ("game", "method", "output"), "top level")
    game = _parse_game(_require_section(doc, "game"))
    method_sec = doc.get("method", {})
    if not isinstance(method_sec, dict):
        raise ConfigError("section 'method' must be an object")
    name = _get_choice(method_sec, "name", "mcgni", "method", METHODS)
    merged = dict(FAMILY_METHOD_DEFAULTS.get((game.family, name), {}))
    merged.update(method_sec)
    solver = _parse_method(merged, "method", allow_seeds=True)
    csv_path = None
    if "output" in doc:
        out = _require_section(doc, "output")
        _reject_unknown(out, ("csv",), "output")
        csv_path = out.get("csv")
        if csv_path is not None and not isinstance(csv_path, str):
            raise ConfigError(f"output.csv must be a string path, got {csv_path!r}")
    return RunSpec(game=game, solver=solver, csv_path=csv_path)


def _game_dict(spec: GameSpec) -> dict:
    out = {"family": spec.family, "seed": spec.seed}
    if spec.family == QUADRATIC:
        out.update(n_i=spec.n_i, entry_dist=spec.entry_dist)
    elif spec.family == BLOTTO:
        out.update(m=spec.m)
    else:
        out.update(n_i=spec.n_i, num_players=spec.num_players, dist_id=spec.dist_id)
    return out


def _method_dict(cfg: SolverConfig, with_name: bool, with_seeds: bool) -> dict:
    out = {
        "lambda": cfg.lam,
        "rho": cfg.rho,
        "kappa": cfg.kappa,
        "iterations": cfg.iterations,
        "batch": cfg.mcgni.batch,
        "grad_mode": cfg.mcgni.grad_mode,
        "hvp_eps": cfg.mcgni.hvp_eps,
        "eval_batch": cfg.mcgni.eval_batch,
        "gen_kind": cfg.gen_kind,
        "latent_dim": cfg.latent_dim,
    }
    if with_name:
        out["name"] = cfg.method
    if with_seeds:
        out.update(init_seed=cfg.init_seed, batch_seed=cfg.batch_seed, eval_seed=cfg.eval_seed)
    return out


def emit_config(cfg: RunSpec | SuiteConfig) -> str:
    """Canonical JSON form with every key explicit; reparses to an equal config."""
    if isinstance(cfg, SuiteConfig):
        doc = {
            "suite": {
                "family": cfg.family,
                "sizes": list(cfg.sizes),
                "instances": cfg.instances,
                "suite_seed": cfg.suite_seed,
                "methods": list(cfg.methods),
                "output_dir": cfg.output_dir,
                "num_players": cfg.num_players,
                "dist_id": cfg.dist_id,
            },
            "overrides": {
                m: _method_dict(cfg.templates[m], with_name=False, with_seeds=False)
                for m in cfg.methods
            },
        }
    else:
        doc = {
            "game": _game_dict(cfg.game),
            "method": _method_dict(cfg.solver, with_name=True, with_seeds=True),
        }
        if cfg.csv_path is not None:
            doc["output"] = {"csv": cfg.csv_path}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# metrics and summary artifacts
# ---------------------------------------------------------------------------


def _fmt(v: float | None) -> str:
    return "" if v is None else format(v, ".17g")


def write_metrics_csv(rows: list[MetricsRow], path: str) -> None:
    """Write the per-iteration metrics table.

    Floats carry 17 significant digits so reading the file back reproduces
    them bit-exactly; a skipped diagnostic is an empty field.
    """
    if not rows:
        raise ValueError("refusing to write an empty metrics table")
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.iteration},{_fmt(r.local_regret)},{_fmt(r.grad_norm)},"
            f"{_fmt(r.snp_residual)},{_fmt(r.elapsed_ms)}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metrics_csv(path: str) -> list[MetricsRow]:
    with open(path, "r", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or unexpected metrics header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 5:
            raise ValueError(f"{path}: malformed row {ln!r}")
        rows.append(
            MetricsRow(
                iteration=int(parts[0]),
                local_regret=float(parts[1]),
                grad_norm=float(parts[2]) if parts[2] else None,
                snp_residual=float(parts[3]) if parts[3] else None,
                elapsed_ms=float(parts[4]) if parts[4] else None,
            )
        )
    return rows


def strip_elapsed(rows: list[MetricsRow]) -> list[MetricsRow]:
    """Timing-free copy; file artifacts must not depend on wall time."""
    return [replace(r, elapsed_ms=None) for r in rows]


@dataclass(frozen=True)
class CellStats:
    mean: float
    std: float
    diverged: int
    n: int


@dataclass(frozen=True)
class SummaryTable:
    suite: SuiteConfig
    cells: dict[tuple[int, str], CellStats]


def summary_to_dict(table: SummaryTable) -> dict:
    suite = table.suite
    cells = []
    for size in suite.sizes:
        for m in suite.methods:
            c = table.cells[(size, m)]
            cells.append(
                {
                    "family": suite.family,
                    "size": size,
                    "method": m,
                    "mean": c.mean,
                    "std": c.std,
                    "diverged": c.diverged,
                    "n": c.n,
                }
            )
    return {"suite": json.loads(emit_config(suite)), "cells": cells}


def write_summary_json(table: SummaryTable, path: str) -> None:
    """JSON summary; one cell per (size, method) with mean/std/diverged/n."""
    if not table.suite.methods:
        raise ValueError("summary has no methods; nothing to write")
    missing = [
        (s, m) for s in table.suite.sizes for m in table.suite.methods if (s, m) not in table.cells
    ]
    if missing:
        raise ValueError(f"summary is missing cells: {missing}")
    text = json.dumps(summary_to_dict(table), indent=2, sort_keys=True) + "\n"
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# suite execution
# ---------------------------------------------------------------------------


def suite_game(suite: SuiteConfig, size: int, instance: int) -> GameInstance:
    """Instance j of a suite cell; the game seed is suite_seed + j."""
    seed = suite.suite_seed + instance
    if suite.family == QUADRATIC:
        return gen_quadratic(seed, size)
    if suite.family == BLOTTO:
        return gen_blotto(seed, size)
    dist = suite.dist_id or GAMUT_DISTRIBUTIONS[instance % len(GAMUT_DISTRIBUTIONS)]
    return gen_gamut(seed, suite.num_players, size, dist)


def cell_seeds(suite_seed: int, size: int, instance: int, method_index: int) -> tuple[int, int, int]:
    """Derived (init, batch, eval) seeds for one run; stable across platforms."""
    state = np.random.SeedSequence([suite_seed, size, instance, method_index]).generate_state(3)
    return int(state[0]), int(state[1]), int(state[2])


def run_csv_path(suite: SuiteConfig, size: int, instance: int, method: str) -> str:
    name = f"{suite.family}_size{size}_inst{instance:03d}_{method}.csv"
    return os.path.join(suite.output_dir, name)


def _run_cell(suite: SuiteConfig, size: int, instance: int, method: str) -> tuple[float, bool]:
    game = suite_game(suite, size, instance)
    init_s, batch_s, eval_s = cell_seeds(
        suite.suite_seed, size, instance, suite.methods.index(method)
    )
    cfg = replace(
        suite.templates[method], init_seed=init_s, batch_seed=batch_s, eval_seed=eval_s
    )
    state, rows = run(cfg, game)
    write_metrics_csv(strip_elapsed(rows), run_csv_path(suite, size, instance, method))
    final = rows[-1].local_regret if rows else float("inf")
    return final, state.diverged


def _run_cell_job(args) -> tuple[tuple[int, int, str], tuple[float, bool]]:
    suite, size, instance, method = args
    return (size, instance, method), _run_cell(suite, size, instance, method)


def run_suite(suite: SuiteConfig) -> SummaryTable:
    """Execute every (size, instance, method) run and aggregate final regrets.

    Diverged runs contribute their last recorded regret and are counted.  Set
    the MIXEDNASH_WORKERS environment variable to run instances in parallel;
    the reduction order is fixed either way.
    """
    if not suite.templates:
        raise ValueError("suite has no method templates")
    try:
        os.makedirs(suite.output_dir, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {suite.output_dir!r}: {e}") from e
    jobs = [
        (suite, size, j, m) for size in suite.sizes for j in range(suite.instances) for m in suite.methods
    ]
    results: dict[tuple[int, int, str], tuple[float, bool]] = {}
    workers = int(os.environ.get(WORKER_ENV, "1") or "1")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, value in pool.map(_run_cell_job, jobs):
                results[key] = value
    else:
        for job in jobs:
            key, value = _run_cell_job(job)
            results[key] = value
    cells = {}
    for size in suite.sizes:
        for m in suite.methods:
            finals = [results[(size, j, m)] for j in range(suite.instances)]
            regrets = np.array([f for f, _ in finals])
            diverged = sum(1 for _, d in finals if d)
            std = float(np.std(regrets, ddof=1)) if len(regrets) > 1 else 0.0
            cells[(size, m)] = CellStats(
                mean=float(np.mean(regrets)), std=std, diverged=diverged, n=len(regrets)
            )
    return SummaryTable(suite=suite, cells=cells)
