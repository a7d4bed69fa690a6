"""Full-scale acceptance gate.

One test per criterion; each prints a pass/fail line with the measured
numbers before asserting.  The two benchmark suites (criteria 5 and 6) run
once as module fixtures and take ~15 minutes each single-core; everything
else is fast.
"""

import json
import os
import time

import numpy as np
import pytest

from mixednash import checks, games, harness, optim
from mixednash.baselines import baseline_step, sga_direction, simultaneous_gradient


def _report(num, name, ok, detail):
    print(f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


# ---------------------------------------------------------------------------
# gradients and estimator identities
# ---------------------------------------------------------------------------


def test_criterion_1_gradient_correctness():
    t0 = time.perf_counter()
    results = [
        checks.check_vjp(cases=100),
        checks.check_estimate_grad(cases=100),
        checks.check_mcgni_grad(cases=100),
        checks.check_gni_grad(cases=100),
    ]
    elapsed = time.perf_counter() - t0
    ok = all(r.ok for r in results) and elapsed < 120.0
    detail = "; ".join(f"{r.name}: {r.detail}" for r in results) + f"; {elapsed:.1f}s"
    _report(1, "gradient correctness", ok, detail)


def test_criterion_2_sandwich_bounds():
    r = checks.check_sandwich(games=100)
    _report(2, "local-regret sandwich", r.ok, r.detail)


def test_criterion_3_pure_strategy_reduction():
    r = checks.check_reduction(pairs=100)
    _report(3, "point-mass reduction", r.ok, r.detail)


def test_criterion_4_closed_form_oracle():
    t0 = time.perf_counter()
    r = checks.check_oracle(games=20)
    elapsed = time.perf_counter() - t0
    ok = r.ok and elapsed < 60.0
    _report(4, "closed-form oracle", ok, f"{r.detail}; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# benchmark suites
# ---------------------------------------------------------------------------


def _run_timed_suite(doc):
    suite = harness.parse_config(json.dumps(doc))
    t0 = time.perf_counter()
    table = harness.run_suite(suite)
    return table, time.perf_counter() - t0


@pytest.fixture(scope="module")
def quadratic_suite(tmp_path_factory):
    outdir = str(tmp_path_factory.mktemp("quad_suite"))
    return _run_timed_suite({"suite": {"family": "quadratic", "sizes": [3], "output_dir": outdir}})


@pytest.fixture(scope="module")
def blotto_suite(tmp_path_factory):
    outdir = str(tmp_path_factory.mktemp("blotto_suite"))
    return _run_timed_suite({"suite": {"family": "blotto", "sizes": [3], "output_dir": outdir}})


def test_criterion_5_quadratic_suite_ordering(quadratic_suite):
    table, elapsed = quadratic_suite
    mc = table.cells[(3, "mcgni")]
    gg = table.cells[(3, "gradgni")]
    sg = table.cells[(3, "sga")]
    ok = (
        mc.mean < 1e-2
        and gg.mean >= 10.0 * mc.mean
        and mc.mean < gg.mean < sg.mean
        and elapsed < 1800.0
    )
    detail = (
        f"mcgni {mc.mean:.3e}±{mc.std:.1e}, gradgni {gg.mean:.3e}±{gg.std:.1e}, "
        f"sga {sg.mean:.3e} ({sg.diverged}/{sg.n} diverged), "
        f"ratio {gg.mean / mc.mean:.1f}x, {elapsed / 60:.1f} min"
    )
    _report(5, "quadratic suite ordering", ok, detail)


def test_criterion_6_blotto_suite(blotto_suite):
    table, elapsed = blotto_suite
    mc = table.cells[(3, "mcgni")]
    gg = table.cells[(3, "gradgni")]
    sg = table.cells[(3, "sga")]
    ok = (
        mc.diverged == 0
        and gg.diverged == 0
        and sg.diverged == 0
        and mc.mean < gg.mean
        and mc.mean < sg.mean
        and all(c.mean < 1e-3 for c in (mc, gg, sg))
    )
    detail = (
        f"mcgni {mc.mean:.3e}, gradgni {gg.mean:.3e}, sga {sg.mean:.3e}; "
        f"diverged {mc.diverged}+{gg.diverged}+{sg.diverged}; {elapsed / 60:.1f} min"
    )
    _report(6, "blotto suite", ok, detail)


# ---------------------------------------------------------------------------
# convergence shape, baseline sanity, determinism
# ---------------------------------------------------------------------------


def test_criterion_7_sublinear_stationarity():
    Ks = (250, 500, 1000, 2000)
    slopes = []
    all_mono = True
    for seed in range(6):
        game = games.gen_convex_quadratic(seed, n_i=3)
        lam = 1.0 / (2.0 * games.gradient_lipschitz_bound(game))
        cfg = optim.SolverConfig(
            method="mcgni", lam=lam, rho=1e-2, kappa=0.0, iterations=2000,
            gen_kind="constant", init_seed=seed,
        )
        _, rows = optim.run(cfg, game)
        vals = [K * optim.min_grad_decay(rows[: K + 1]) for K in Ks]
        slopes.append(float(np.polyfit(Ks, vals, 1)[0]))
        regs = [r.local_regret for r in rows]
        all_mono = all_mono and all(b <= a + 1e-15 for a, b in zip(regs, regs[1:]))
    ok = all(s <= 1e-12 for s in slopes) and all_mono
    detail = f"K*min slopes {['%.1e' % s for s in slopes]}, monotone descent {all_mono}"
    _report(7, "sublinear stationarity shape", ok, detail)


def test_criterion_8_sga_bilinear_sanity():
    Q1 = np.array([[0.0, 0.5], [0.5, 0.0]])
    game = games.make_quadratic([Q1, -Q1], [np.zeros(2), np.zeros(2)], dims=(1, 1))
    rho = 0.05

    def norms(lam_sga):
        x = np.array([1.0, 1.0])
        out = [float(np.linalg.norm(simultaneous_gradient(x, game)))]
        for _ in range(1000):
            x = baseline_step(x, sga_direction(x, game, lam_sga), rho).x
            out.append(float(np.linalg.norm(simultaneous_gradient(x, game))))
        return out

    adjusted = norms(1.0)
    plain = norms(0.0)
    monotone = all(b < a for a, b in zip(adjusted, adjusted[1:]))
    ok = monotone and plain[-1] > plain[0]
    detail = (
        f"adjusted ||xi|| {adjusted[0]:.3f} -> {adjusted[-1]:.2e} "
        f"(strictly decreasing {monotone}); unadjusted {plain[0]:.3f} -> {plain[-1]:.2e}"
    )
    _report(8, "sga bilinear sanity", ok, detail)


def test_criterion_9_byte_identical_reruns(tmp_path):
    outdir = os.path.join(tmp_path, "bench")
    doc = {
        "suite": {
            "family": "quadratic",
            "sizes": [2],
            "instances": 2,
            "suite_seed": 1,
            "output_dir": outdir,
        },
        "method_defaults": {"iterations": 200, "batch": 32, "eval_batch": 128},
    }
    suite = harness.parse_config(json.dumps(doc))

    def run_once():
        table = harness.run_suite(suite)
        sp = os.path.join(outdir, "summary.json")
        harness.write_summary_json(table, sp)
        return {
            name: open(os.path.join(outdir, name), "rb").read()
            for name in sorted(os.listdir(outdir))
        }

    first = run_once()
    second = run_once()
    identical = first.keys() == second.keys() and all(
        first[n] == second[n] for n in first
    )
    detail = f"{len(first)} artifacts compared byte-for-byte"
    _report(9, "deterministic artifacts", identical, detail)
