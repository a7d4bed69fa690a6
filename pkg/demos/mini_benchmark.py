"""A scaled-down benchmark suite: three methods on a few random games.

This is the same machinery the CLI's `bench` subcommand drives, shrunk to run
in about a minute.  Every run writes a per-iteration CSV under out_dir and the
aggregate lands in summary.json; rerunning produces byte-identical files.

Run:  python3 demos/mini_benchmark.py
"""

import json

from mixednash.harness import parse_config, run_suite, write_summary_json

doc = {
    "suite": {
        "family": "quadratic",
        "sizes": [2],
        "instances": 3,
        "suite_seed": 0,
        "methods": ["mcgni", "gradgni", "sga"],
        "output_dir": "demo_bench_out",
    },
    # shrink everything; the shipped defaults are 2000 iterations with the
    # large net and per-family method radii (see FAMILY_METHOD_DEFAULTS)
    "method_defaults": {"iterations": 200, "batch": 32, "eval_batch": 128},
    "overrides": {"mcgni": {"latent_dim": 2}},
}

suite = parse_config(json.dumps(doc))
print(f"running {len(suite.sizes) * suite.instances * len(suite.methods)} cells...")
table = run_suite(suite)
write_summary_json(table, "demo_bench_out/summary.json")

print(f"\n{'method':>8} {'mean regret':>13} {'std':>10} {'diverged':>9}")
for (size, method), cell in sorted(table.cells.items()):
    print(f"{method:>8} {cell.mean:>13.4e} {cell.std:>10.2e} {cell.diverged:>6}/{cell.n}")
print("\nper-run CSVs and summary.json are in demo_bench_out/")
print("note: the baselines report regret at their own per-family radii, so the")
print("columns are not directly comparable at this tiny iteration count")
