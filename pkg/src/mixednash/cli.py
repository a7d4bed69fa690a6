"""Command-line interface: solve one game, bench a suite, or self-check.

Exit codes: 0 success, 1 self-check failure, 2 usage or configuration or
I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .checks import selfcheck
from .harness import (
    ConfigError,
    RunSpec,
    SuiteConfig,
    parse_config,
    run_suite,
    strip_elapsed,
    write_metrics_csv,
    write_summary_json,
)
from .optim import run

_GAME_SCHEMA = """\
"game" section keys:
  family        quadratic | blotto | multiquadratic   (required)
  seed          integer >= 0                           (default 0)
  n_i           player action dimension, >= 1          (default 3; quadratic, multiquadratic)
  entry_dist    entry distribution                     (default uniform01; quadratic)
  m             battlefield count, >= 1                (default 3; blotto)
  num_players   player count, >= 2                     (default 4; multiquadratic)
  dist_id       entry distribution                     (default uniform01; multiquadratic)

entry distributions: uniform01, uniform_pm1, normal, exponential, discrete"""

_METHOD_SCHEMA = """\
"method" keys (all optional; omitted keys take the defaults below):
  name          mcgni | gradgni | sga                  (default mcgni)
  lambda        local steepest-descent radius, > 0     (default 1e-3)
  rho           step size, > 0                         (default 1e-2)
  kappa         momentum in [0, 1)                     (default 0.9)
  iterations    step count, >= 1                       (default 2000)
  batch         training batch size, >= 1              (default 128)
  grad_mode     exact | first_order                    (default exact)
  hvp_eps       finite-difference HVP base step, > 0   (default 1e-4)
  eval_batch    held-out evaluation batch, >= 1        (default 1024)
  gen_kind      net | constant                         (default net)
  latent_dim    integer >= 1, or null for n_i          (default null)
  init_seed / batch_seed / eval_seed                   (defaults 0 / 1 / 2)

per-family defaults (applied beneath any value you set; each method runs at
its own natural radius/step, see harness.FAMILY_METHOD_DEFAULTS):
  gradgni on quadratic/multiquadratic   lambda = 0.2
  gradgni on blotto                     lambda = 1e-3
  sga on any family                     lambda = 1.0
  mcgni on blotto                       rho    = 1.0"""

_SOLVE_EPILOG = f"""\
config file: JSON object with sections "game" (required), "method", "output".

{_GAME_SCHEMA}

{_METHOD_SCHEMA}

"output" keys:
  csv           path for the per-iteration metrics CSV (default: not written)

The metrics CSV columns are iteration,local_regret,grad_norm,snp_residual,
elapsed_ms; floats use 17 significant digits; elapsed_ms is left empty so
identical configs produce identical bytes."""

_BENCH_EPILOG = f"""\
config file: JSON object with sections "suite" (required), "method_defaults",
"overrides".

"suite" section keys:
  family        quadratic | blotto | multiquadratic   (required)
  sizes         list of n_i (or m for blotto), >= 1    (default [3])
  instances     games per size, >= 1                   (default 10; benchmark scale 100)
  suite_seed    integer >= 0; instance j uses seed suite_seed + j (default 0)
  methods       subset of [mcgni, gradgni, sga]        (default all three)
  output_dir    directory for CSVs and summary.json    (default bench_out)
  num_players   player count, >= 2                     (default 4; multiquadratic)
  dist_id       entry distribution, or null to cycle
                all five per instance                  (default null; multiquadratic)

"method_defaults" applies solver keys to every method; "overrides" maps a
method name to solver keys for that method alone.  Both accept the "method"
keys below except name and the three seeds (per-run seeds derive from
suite_seed).

{_METHOD_SCHEMA}

Set MIXEDNASH_WORKERS=<k> to run suite cells in k processes; output is
byte-identical either way."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixednash",
        description=(
            "Approximate mixed-strategy Nash equilibria of continuous games by "
            "descending a sampled local-regret objective; includes pure-strategy "
            "baselines and a seeded benchmark harness."
        ),
        epilog="exit codes: 0 success, 1 self-check failure, 2 usage/config/I-O error",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_solve = sub.add_parser(
        "solve",
        help="run one method on one game from a JSON config",
        epilog=_SOLVE_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_solve.add_argument("config", help="path to the run config (JSON)")
    p_bench = sub.add_parser(
        "bench",
        help="run a seeded benchmark suite from a JSON suite config",
        epilog=_BENCH_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_bench.add_argument("config", help="path to the suite config (JSON)")
    sub.add_parser("check", help="run the built-in correctness checks")
    return parser


def _cmd_solve(path: str) -> int:
    with open(path, "r", encoding="utf-8") as fh:
        spec = parse_config(fh.read())
    if isinstance(spec, SuiteConfig):
        raise ConfigError("'solve' expects a run config; this file has a 'suite' section")
    game = spec.game.build()
    state, rows = run(spec.solver, game)
    if spec.csv_path is not None:
        write_metrics_csv(strip_elapsed(rows), spec.csv_path)
    last = rows[-1]
    print(
        f"method={spec.solver.method} family={spec.game.family} "
        f"iterations={state.iteration} diverged={str(state.diverged).lower()}"
    )
    snp = "" if last.snp_residual is None else format(last.snp_residual, ".6e")
    print(
        f"final: iteration={last.iteration} local_regret={last.local_regret:.6e} "
        f"snp_residual={snp}"
    )
    if spec.csv_path is not None:
        print(f"metrics written to {spec.csv_path}")
    return 0


def _cmd_bench(path: str) -> int:
    with open(path, "r", encoding="utf-8") as fh:
        spec = parse_config(fh.read())
    if isinstance(spec, RunSpec):
        raise ConfigError("'bench' expects a suite config with a 'suite' section")
    table = run_suite(spec)
    summary_path = os.path.join(spec.output_dir, "summary.json")
    write_summary_json(table, summary_path)
    for size in spec.sizes:
        for m in spec.methods:
            c = table.cells[(size, m)]
            print(
                f"{spec.family} size={size} {m}: mean={c.mean:.6e} std={c.std:.6e} "
                f"diverged={c.diverged}/{c.n}"
            )
    print(f"summary written to {summary_path}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args.config)
        if args.command == "bench":
            return _cmd_bench(args.config)
        return 0 if selfcheck(verbose=True).ok else 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
