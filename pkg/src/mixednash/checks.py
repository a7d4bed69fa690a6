"""Executable correctness checks shared by the CLI selfcheck and the tests.

Four groups, mirroring the release gate: finite-difference gradient checks
for every gradient path, the noise-free local-regret sandwich bound, the
pure-strategy reduction (point-mass generators reproduce the pure-strategy
local regret bit-for-bit up to rounding), and convergence to closed-form
stationary points on own-block-convex quadratic games.

Each check returns a result with the measured worst-case error so failures
are diagnosable from the report alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .baselines import gni_grad, gni_value
from .games import (
    gen_blotto,
    gen_convex_quadratic,
    gen_quadratic,
    gradient_lipschitz_bound,
    stationary_point,
)
from .mcgni import (
    MCGNIConfig,
    Profile,
    draw_batches,
    estimate_F,
    estimate_grad_F,
    mcgni_grad,
    mcgni_value,
    split_blocks,
)
from .optim import SolverConfig, iterate_params, run
from .pushforward import (
    CONSTANT,
    NET,
    forward,
    init_generator,
    make_constant,
    replace_params,
    vjp_params,
)

_TINY = 1e-30


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class Report:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def fd_gradient(
    f: Callable[[np.ndarray], float],
    theta: np.ndarray,
    step: float = 1e-6,
    coords: Sequence[int] | None = None,
) -> np.ndarray:
    """Central-difference gradient, per-coordinate step scaled by magnitude."""
    idx = list(range(theta.size)) if coords is None else list(coords)
    out = np.empty(len(idx))
    for row, j in enumerate(idx):
        h = step * (1.0 + abs(float(theta[j])))
        tp = theta.copy()
        tp[j] += h
        tm = theta.copy()
        tm[j] -= h
        out[row] = (f(tp) - f(tm)) / (2.0 * h)
    return out


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), _TINY))


def _small_net(rng: np.random.Generator, d: int, n_i: int, smooth: bool = True):
    hidden = (int(rng.integers(2, 5)),)
    acts = ("tanh",) if smooth else (str(rng.choice(["tanh", "relu", "identity"])),)
    return init_generator(
        NET, d, n_i, int(rng.integers(2**31)), hidden=hidden, activations=acts
    )


def check_vjp(cases: int = 100, seed: int = 101, tol: float = 1e-6) -> CheckResult:
    """Reverse-mode parameter gradients vs finite differences of <u, g(omega)>."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in range(cases):
        if c % 10 == 9:
            # full default architecture, spot-checked on a coordinate sample
            gen = init_generator(NET, 3, 3, int(rng.integers(2**31)))
            omega = rng.random(3)
            u = rng.standard_normal(3)
            analytic = vjp_params(gen, omega, u)
            coords = sorted(int(j) for j in rng.choice(gen.num_params, 25, replace=False))
            def f(theta, gen=gen, omega=omega, u=u):
                return float(u @ forward(replace_params(gen, theta), omega))
            fd = fd_gradient(f, gen.params, coords=coords)
            worst = max(worst, rel_err(analytic[coords], fd))
            continue
        d = int(rng.integers(1, 4))
        n_i = int(rng.integers(1, 4))
        depth = int(rng.integers(1, 3))
        hidden = tuple(int(rng.integers(2, 5)) for _ in range(depth))
        acts = tuple(str(rng.choice(["tanh", "relu", "identity"])) for _ in range(depth))
        gen = init_generator(
            NET, d, n_i, int(rng.integers(2**31)), hidden=hidden, activations=acts
        )
        omega = rng.random(d)
        u = rng.standard_normal(n_i)
        analytic = vjp_params(gen, omega, u)
        def f(theta, gen=gen, omega=omega, u=u):
            return float(u @ forward(replace_params(gen, theta), omega))
        worst = max(worst, rel_err(analytic, fd_gradient(f, gen.params)))
    return CheckResult(
        name="vjp_params gradcheck",
        ok=worst < tol,
        detail=f"worst rel err {worst:.3e} over {cases} cases (tol {tol:g})",
    )


def _mixed_profile(rng: np.random.Generator, game, with_constant: bool) -> Profile:
    gens = []
    for k, n_i in enumerate(game.dims):
        if with_constant and k == 0:
            gens.append(make_constant(rng.uniform(-0.5, 0.5, n_i), latent_dim=1))
        else:
            gens.append(_small_net(rng, d=2, n_i=n_i))
    return Profile(generators=tuple(gens))


def check_estimate_grad(cases: int = 100, seed: int = 202, tol: float = 1e-5) -> CheckResult:
    """Sampled expected-cost gradients vs finite differences on a frozen batch."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for c in range(cases):
        if c % 5 == 4:
            game = gen_blotto(int(rng.integers(2**31)), m=2)
        else:
            game = gen_quadratic(int(rng.integers(2**31)), n_i=int(rng.integers(1, 4)))
        profile = _mixed_profile(rng, game, with_constant=(c % 4 == 3))
        batches = draw_batches(rng, profile, B=4)
        i = int(rng.integers(game.num_players))
        analytic = estimate_grad_F(profile, game, i, batches)
        def f(theta, profile=profile, game=game, i=i, batches=batches):
            return estimate_F(profile.with_params(theta), game, i, batches)
        worst = max(worst, rel_err(analytic, fd_gradient(f, profile.flat_params())))
    return CheckResult(
        name="estimate_grad_F gradcheck",
        ok=worst < tol,
        detail=f"worst rel err {worst:.3e} over {cases} cases (tol {tol:g})",
    )


def check_mcgni_grad(cases: int = 100, seed: int = 303, tol: float = 1e-4) -> CheckResult:
    """Exact-mode local-regret gradients vs finite differences of the value."""
    rng = np.random.default_rng(seed)
    cfg = MCGNIConfig(lam=0.05, batch=4)
    worst = 0.0
    for c in range(cases):
        if c % 3 == 2:
            game = gen_blotto(int(rng.integers(2**31)), m=2)
        else:
            game = gen_quadratic(int(rng.integers(2**31)), n_i=int(rng.integers(1, 4)))
        profile = _mixed_profile(rng, game, with_constant=(c % 4 == 3))
        batches = draw_batches(rng, profile, B=4)
        analytic = mcgni_grad(profile, game, cfg, batches).flat()
        def f(theta, profile=profile, game=game, batches=batches):
            return mcgni_value(profile.with_params(theta), game, cfg, batches)[0]
        worst = max(worst, rel_err(analytic, fd_gradient(f, profile.flat_params())))
    return CheckResult(
        name="mcgni_grad gradcheck",
        ok=worst < tol,
        detail=f"worst rel err {worst:.3e} over {cases} cases (tol {tol:g})",
    )


def check_gni_grad(cases: int = 100, seed: int = 404, tol: float = 1e-6) -> CheckResult:
    """Pure-strategy local-regret gradients vs finite differences of the value."""
    rng = np.random.default_rng(seed)
    lam = 0.05
    worst = 0.0
    for c in range(cases):
        if c % 3 == 2:
            game = gen_blotto(int(rng.integers(2**31)), m=int(rng.integers(2, 4)))
        else:
            game = gen_quadratic(int(rng.integers(2**31)), n_i=int(rng.integers(1, 4)))
        x = rng.uniform(-1.0, 1.0, game.total_dim)
        analytic = gni_grad(x, game, lam, mode="exact")
        def f(y, game=game):
            return gni_value(y, game, lam)
        worst = max(worst, rel_err(analytic, fd_gradient(f, x)))
    return CheckResult(
        name="gni_grad gradcheck",
        ok=worst < tol,
        detail=f"worst rel err {worst:.3e} over {cases} cases (tol {tol:g})",
    )


def check_sandwich(games: int = 100, seed: int = 505, slack: float = 1e-9) -> CheckResult:
    """Noise-free bound lam/2 ||G_i||^2 <= V_i <= 3 lam/2 ||G_i||^2 at lam = 1/(2 L_f)."""
    rng = np.random.default_rng(seed)
    sizes = (2, 3, 5)
    worst_margin = np.inf
    min_v = np.inf
    for c in range(games):
        game = gen_quadratic(int(rng.integers(2**31)), n_i=sizes[c % len(sizes)])
        gens = tuple(
            init_generator(CONSTANT, 1, n_i, int(rng.integers(2**31))) for n_i in game.dims
        )
        profile = Profile(generators=gens)
        lam = 1.0 / (2.0 * gradient_lipschitz_bound(game))
        cfg = MCGNIConfig(lam=lam, batch=1)
        batches = draw_batches(rng, profile, B=1)
        value, per_player = mcgni_value(profile, game, cfg, batches)
        min_v = min(min_v, value)
        for i in range(game.num_players):
            gamma_i = split_blocks(profile, estimate_grad_F(profile, game, i, batches))[i]
            sq = float(gamma_i @ gamma_i)
            worst_margin = min(
                worst_margin,
                per_player[i] - 0.5 * lam * sq,
                1.5 * lam * sq - per_player[i],
            )
    ok = worst_margin >= -slack and min_v >= -slack
    return CheckResult(
        name="sandwich bound",
        ok=ok,
        detail=(
            f"worst bound margin {worst_margin:.3e}, min V {min_v:.3e} "
            f"over {games} games (slack {slack:g})"
        ),
    )


def check_reduction(pairs: int = 100, seed: int = 606, tol: float = 1e-8) -> CheckResult:
    """Point-mass generators reproduce pure-strategy regret value and gradient."""
    rng = np.random.default_rng(seed)
    lam = 0.05
    # the pure-strategy Hessian-vector products use a 1e-5 base step; matching
    # it here makes the two finite-difference paths numerically identical
    cfg = MCGNIConfig(lam=lam, batch=4, hvp_eps=1e-5)
    quad_sizes = (2, 3, 5)
    blotto_sizes = (2, 3, 4)
    worst_v = 0.0
    worst_g = 0.0
    for c in range(pairs):
        if c % 2 == 0:
            game = gen_quadratic(int(rng.integers(2**31)), n_i=quad_sizes[c % 3])
        else:
            game = gen_blotto(int(rng.integers(2**31)), m=blotto_sizes[c % 3])
        x = rng.uniform(-1.0, 1.0, game.total_dim)
        gens = tuple(make_constant(x[sl], latent_dim=1) for sl in game.slices())
        profile = Profile(generators=gens)
        batches = draw_batches(rng, profile, B=4)
        v_mixed, _ = mcgni_value(profile, game, cfg, batches)
        v_pure = gni_value(x, game, lam)
        worst_v = max(worst_v, abs(v_mixed - v_pure) / max(abs(v_pure), _TINY))
        g_mixed = mcgni_grad(profile, game, cfg, batches).flat()
        g_pure = gni_grad(x, game, lam, mode="exact")
        worst_g = max(worst_g, rel_err(g_mixed, g_pure))
    ok = worst_v < tol and worst_g < tol
    return CheckResult(
        name="pure-strategy reduction",
        ok=ok,
        detail=(
            f"worst value rel err {worst_v:.3e}, worst grad rel err {worst_g:.3e} "
            f"over {pairs} pairs (tol {tol:g})"
        ),
    )


def check_oracle(
    games: int = 20,
    seed: int = 707,
    n_i: int = 3,
    iterations: int = 2000,
    x_tol: float = 1e-3,
    snp_tol: float = 1e-6,
) -> CheckResult:
    """Point-mass training reaches the closed-form stationary point.

    Own-block-convex games have a unique joint point where every player's own
    gradient vanishes; momentum descent on the local regret must find it.
    The radius is set to 1/(2 L_f) per game, inside the guarantee region.
    """
    worst_x = 0.0
    worst_snp = 0.0
    for k in range(games):
        game = gen_convex_quadratic(seed + k, n_i)
        lam = 1.0 / (2.0 * gradient_lipschitz_bound(game))
        cfg = SolverConfig(
            method="mcgni",
            lam=lam,
            rho=1e-2,
            kappa=0.9,
            iterations=iterations,
            mcgni=MCGNIConfig(lam=lam, batch=2, eval_batch=2),
            init_seed=seed + 7 * k,
            batch_seed=seed + 7 * k + 1,
            eval_seed=seed + 7 * k + 2,
            gen_kind=CONSTANT,
            latent_dim=1,
        )
        state, rows = run(cfg, game)
        x_err = float(np.linalg.norm(iterate_params(state.iterate) - stationary_point(game)))
        snp = rows[-1].snp_residual
        worst_x = max(worst_x, x_err)
        worst_snp = max(worst_snp, np.inf if snp is None else snp)
        if state.diverged:
            worst_x = np.inf
    ok = worst_x < x_tol and worst_snp < snp_tol
    return CheckResult(
        name="closed-form oracle",
        ok=ok,
        detail=(
            f"worst |x - x*| {worst_x:.3e} (tol {x_tol:g}), "
            f"worst final residual {worst_snp:.3e} (tol {snp_tol:g}) over {games} games"
        ),
    )


def selfcheck(verbose: bool = True) -> Report:
    """Reduced-scale release gate; the full-scale runs live in the test suite."""
    checks = (
        check_vjp(cases=20),
        check_estimate_grad(cases=20),
        check_mcgni_grad(cases=20),
        check_gni_grad(cases=20),
        check_sandwich(games=25),
        check_reduction(pairs=25),
        check_oracle(games=3),
    )
    report = Report(checks=checks)
    if verbose:
        for c in checks:
            print(f"[{'PASS' if c.ok else 'FAIL'}] {c.name}: {c.detail}")
    return report
