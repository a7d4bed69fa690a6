"""Heavy-ball momentum descent and the shared training loop.

One loop drives all three methods.  The iterate is either a mixed-strategy
``Profile`` (generator parameters, method "mcgni") or a ``PureProfile``
(joint action vector, methods "gradgni" and "sga").  Every iteration draws a
fresh training batch (mixed case), computes the method's direction, applies
the momentum update, and records metrics: the local regret on one fixed
held-out batch, the direction norm, and (every 50 iterations) the
stationarity residual.

Divergence (direction norm above 1e12, or a non-finite estimate) stops the
run and flags the state instead of raising; diverged runs still carry their
recorded history so benchmark tables can account for them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from . import baselines
from .baselines import PureProfile
from .games import GameInstance
from .mcgni import MCGNIConfig, Profile, draw_batches, mcgni_grad, mcgni_value, snp_residual
from .pushforward import CONSTANT, DEFAULT_HIDDEN, NET, init_generator

MCGNI_METHOD = "mcgni"
GRADGNI_METHOD = "gradgni"
SGA_METHOD = "sga"
METHODS = (MCGNI_METHOD, GRADGNI_METHOD, SGA_METHOD)

DIVERGENCE_NORM = 1e12
SNP_EVERY = 50

Iterate = Union[Profile, PureProfile]


@dataclass(frozen=True)
class SolverConfig:
    """Full description of one training run.

    lam is the single local-regret radius used everywhere (it overrides the
    embedded estimator config's lam).  Seeds: init_seed drives iterate
    initialization, batch_seed the per-iteration training batches, eval_seed
    the fixed held-out evaluation batch (unless the estimator config pins its
    own).  latent_dim None means each generator uses its player's action
    dimension.
    """

    method: str = MCGNI_METHOD
    lam: float = 1e-3
    rho: float = 1e-2
    kappa: float = 0.9
    iterations: int = 2000
    mcgni: MCGNIConfig = field(default_factory=MCGNIConfig)
    init_seed: int = 0
    batch_seed: int = 1
    eval_seed: int = 2
    gen_kind: str = NET
    latent_dim: int | None = None
    hidden: tuple[int, ...] = DEFAULT_HIDDEN

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError(f"kappa must be in [0, 1), got {self.kappa}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.latent_dim is not None and self.latent_dim < 1:
            raise ValueError(f"latent_dim must be >= 1, got {self.latent_dim}")
        if self.gen_kind not in (NET, CONSTANT):
            raise ValueError(f"gen_kind must be 'net' or 'constant', got {self.gen_kind!r}")

    def effective_mcgni(self) -> MCGNIConfig:
        """Estimator config with lam and eval_seed resolved from this config."""
        eval_seed = self.mcgni.eval_seed if self.mcgni.eval_seed is not None else self.eval_seed
        return replace(self.mcgni, lam=self.lam, eval_seed=eval_seed)


@dataclass(frozen=True)
class MetricsRow:
    """One recorded iteration; None fields were skipped that iteration."""

    iteration: int
    local_regret: float
    grad_norm: float | None
    snp_residual: float | None
    elapsed_ms: float | None


@dataclass
class TrainState:
    """Mutable-history training state; the iterate itself is a value type."""

    iterate: Iterate
    velocity: np.ndarray
    iteration: int
    history: list[MetricsRow]
    diverged: bool = False


def iterate_params(iterate: Iterate) -> np.ndarray:
    """The flat vector the optimizer moves."""
    if isinstance(iterate, Profile):
        return iterate.flat_params()
    return iterate.x


def _with_params(iterate: Iterate, params: np.ndarray) -> Iterate:
    if isinstance(iterate, Profile):
        return iterate.with_params(params)
    return PureProfile(x=params)


def momentum_step(state: TrainState, gradient: np.ndarray, rho: float, kappa: float) -> TrainState:
    """Classical heavy-ball update: v <- kappa v + gradient; params -= rho v.

    kappa = 0 reduces to plain gradient descent.  Returns a new state sharing
    the history list; the input state is not mutated.
    """
    gradient = np.asarray(gradient, dtype=float)
    params = iterate_params(state.iterate)
    if gradient.shape != params.shape:
        raise ValueError(f"gradient shape {gradient.shape} != parameter shape {params.shape}")
    velocity = kappa * state.velocity + gradient
    new_params = params - rho * velocity
    return TrainState(
        iterate=_with_params(state.iterate, new_params),
        velocity=velocity,
        iteration=state.iteration + 1,
        history=state.history,
        diverged=state.diverged,
    )


def init_profile(game: GameInstance, config: SolverConfig) -> Profile:
    """Seeded per-player generators; child seeds derive from init_seed."""
    child = np.random.SeedSequence(config.init_seed).generate_state(game.num_players)
    gens = []
    for k, n_i in enumerate(game.dims):
        d = config.latent_dim if config.latent_dim is not None else n_i
        gens.append(init_generator(config.gen_kind, d, n_i, int(child[k]), hidden=config.hidden))
    return Profile(generators=tuple(gens))


def run(config: SolverConfig, game: GameInstance) -> tuple[TrainState, list[MetricsRow]]:
    """Train one method on one game; deterministic given the config seeds.

    Metrics row 0 describes the initial iterate (no gradient yet); row k >= 1
    is recorded after step k with the norm of the direction used by that
    step.  The stationarity residual appears every 50 iterations and on the
    final row.
    """
    t0 = time.perf_counter()
    mixed = config.method == MCGNI_METHOD
    if mixed:
        iterate: Iterate = init_profile(game, config)
        mcfg = config.effective_mcgni()
        eval_batches = draw_batches(
            np.random.default_rng(mcfg.eval_seed),
            iterate,
            mcfg.eval_batch,
            tag=f"eval:{mcfg.eval_seed}",
        )
        rng_batch = np.random.default_rng(config.batch_seed)
    else:
        rng_init = np.random.default_rng(config.init_seed)
        iterate = PureProfile(x=rng_init.uniform(-0.5, 0.5, game.total_dim))
        mcfg = None
        eval_batches = None
        rng_batch = None

    def regret_and_snp(it: Iterate, want_snp: bool) -> tuple[float, float | None]:
        if mixed:
            value, _ = mcgni_value(it, game, mcfg, eval_batches)
            snp = snp_residual(it, game, eval_batches) if want_snp else None
        else:
            value = baselines.gni_value(it.x, game, config.lam)
            if want_snp:
                xi = baselines.simultaneous_gradient(it.x, game)
                snp = float(xi @ xi)
            else:
                snp = None
        return value, snp

    state = TrainState(
        iterate=iterate,
        velocity=np.zeros_like(iterate_params(iterate)),
        iteration=0,
        history=[],
        diverged=False,
    )

    def record(grad_norm: float | None) -> bool:
        k = state.iteration
        want_snp = (k % SNP_EVERY == 0) or (k == config.iterations)
        try:
            value, snp = regret_and_snp(state.iterate, want_snp)
        except FloatingPointError:
            return False
        if not np.isfinite(value):
            return False
        state.history.append(
            MetricsRow(
                iteration=k,
                local_regret=value,
                grad_norm=grad_norm,
                snp_residual=snp,
                elapsed_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
        return True

    if not record(None):
        state.diverged = True
        return state, state.history

    for k in range(1, config.iterations + 1):
        try:
            if mixed:
                batches = draw_batches(
                    rng_batch, state.iterate, mcfg.batch, tag=f"train:{config.batch_seed}:{k}"
                )
                direction = mcgni_grad(state.iterate, game, mcfg, batches).flat()
            elif config.method == GRADGNI_METHOD:
                direction = baselines.gni_grad(
                    state.iterate.x, game, config.lam, mode=config.mcgni.grad_mode
                )
            else:
                direction = baselines.sga_direction(state.iterate.x, game)
        except FloatingPointError:
            state.diverged = True
            break
        norm = float(np.linalg.norm(direction))
        if not np.isfinite(norm) or norm > DIVERGENCE_NORM:
            state.diverged = True
            break
        state = momentum_step(state, direction, config.rho, config.kappa)
        if not record(norm):
            state.diverged = True
            break
    return state, state.history


def min_grad_decay(metrics: list[MetricsRow]) -> float:
    """Running minimum of the squared direction norm over the given rows.

    Tests sweep a prefix length K and assert K times this value stays
    bounded, the shape of the sublinear convergence guarantee.
    """
    norms = [row.grad_norm for row in metrics if row.grad_norm is not None]
    if not norms:
        raise ValueError("metrics contain no gradient norms")
    return float(min(n * n for n in norms))
