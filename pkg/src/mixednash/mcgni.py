"""Monte-Carlo local-regret machinery for mixed-strategy profiles.

Each player's mixed strategy is a generator (see ``pushforward``); the joint
profile induces expected costs F_i.  This module estimates:

* ``estimate_F``        -- sample average of f_i over generator outputs.
* ``estimate_grad_F``   -- parameter gradient of that estimate, all players.
* ``mcgni_value``       -- the local regret V = sum_i [F_i - F_i(shifted_i)],
                           where shifted_i moves player i's params one
                           steepest-descent step of radius lam.
* ``mcgni_grad``        -- the exact parameter gradient of V, including the
                           second-order term created by the inner shift
                           (finite-difference Hessian-vector products), or a
                           cheaper first-order variant that drops it.
* ``snp_residual``      -- sum over players of the mean squared norm of the
                           estimated own-cost functional gradient; zero
                           characterizes a stationary Nash point.

Every estimate inside one call reuses one frozen latent batch per player
(common random numbers); without that the V difference would drown in noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .games import GameInstance, cost_batch, cost_grad_batch
from .pushforward import (
    CONSTANT,
    Generator,
    OmegaBatch,
    axpy_params,
    forward_activations,
    pairwise_sum,
    replace_params,
    sample_omega,
    vjp_params_batch,
)

EXACT = "exact"
FIRST_ORDER = "first_order"

_TINY = 1e-30
_SNP_INNER_CAP = 64


@dataclass(frozen=True)
class Profile:
    """One generator per player; output dims must match the game dims."""

    generators: tuple[Generator, ...]

    @property
    def num_players(self) -> int:
        return len(self.generators)

    def param_lengths(self) -> tuple[int, ...]:
        return tuple(g.num_params for g in self.generators)

    def flat_params(self) -> np.ndarray:
        return np.concatenate([g.params for g in self.generators])

    def with_params(self, flat: np.ndarray) -> "Profile":
        """New profile with parameters replaced from one concatenated vector."""
        blocks = split_blocks(self, flat)
        gens = [replace_params(g, blk) for g, blk in zip(self.generators, blocks)]
        return Profile(generators=tuple(gens))


@dataclass(frozen=True)
class MCGNIConfig:
    """Estimator knobs.

    lam is the local steepest-descent radius; batch the training batch size;
    grad_mode selects the exact gradient (with the Hessian-vector correction)
    or the first-order shortcut; hvp_eps the base step of the central
    finite-difference HVP; eval_batch/eval_seed control the held-out batch
    used for reported regret (eval_seed None lets the solver derive one).
    """

    lam: float = 1e-3
    batch: int = 128
    grad_mode: str = EXACT
    hvp_eps: float = 1e-4
    eval_batch: int = 1024
    eval_seed: int | None = None

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if self.grad_mode not in (EXACT, FIRST_ORDER):
            raise ValueError(f"grad_mode must be 'exact' or 'first_order', got {self.grad_mode!r}")
        if not self.hvp_eps > 0:
            raise ValueError(f"hvp_eps must be > 0, got {self.hvp_eps}")
        if self.eval_batch < 1:
            raise ValueError(f"eval_batch must be >= 1, got {self.eval_batch}")


@dataclass(frozen=True)
class GradEstimate:
    """Sampled gradient of the local regret plus the regret values themselves."""

    blocks: tuple[np.ndarray, ...]
    value: float
    per_player: tuple[float, ...]

    def flat(self) -> np.ndarray:
        return np.concatenate(self.blocks)


def split_blocks(profile: Profile, flat: np.ndarray) -> list[np.ndarray]:
    """Split a concatenated parameter-space vector into per-player blocks."""
    flat = np.asarray(flat, dtype=float)
    lengths = profile.param_lengths()
    if flat.shape != (sum(lengths),):
        raise ValueError(f"flat vector shape {flat.shape} != ({sum(lengths)},)")
    out, start = [], 0
    for ln in lengths:
        out.append(flat[start : start + ln])
        start += ln
    return out


def draw_batches(
    rng: np.random.Generator, profile: Profile, B: int, tag: str = ""
) -> tuple[OmegaBatch, ...]:
    """One latent batch per player, drawn in player order from a shared rng."""
    return tuple(sample_omega(rng, B, g.latent_dim, tag=tag) for g in profile.generators)


# ---------------------------------------------------------------------------
# internal plumbing
# ---------------------------------------------------------------------------


def _check_inputs(
    profile: Profile, game: GameInstance, batches: Sequence[OmegaBatch]
) -> list[np.ndarray]:
    if profile.num_players != game.num_players:
        raise ValueError(
            f"profile has {profile.num_players} generators, game has {game.num_players} players"
        )
    for g, n_i in zip(profile.generators, game.dims):
        if g.out_dim != n_i:
            raise ValueError(f"generator output dim {g.out_dim} != game dim {n_i}")
    if len(batches) != profile.num_players:
        raise ValueError(f"need {profile.num_players} latent batches, got {len(batches)}")
    sizes = {b.batch_size for b in batches}
    if len(sizes) != 1:
        raise ValueError(f"latent batches disagree on batch size: {sorted(sizes)}")
    if all(g.variant == CONSTANT for g in profile.generators):
        # point-mass pushforwards: every sample maps to the same action, so
        # one latent point carries the whole batch; this is what makes the
        # estimates bit-identical at any batch size
        return [b.samples[:1] for b in batches]
    return [b.samples for b in batches]


def _activation_stacks(profile: Profile, omegas: list[np.ndarray]) -> list[list[np.ndarray]]:
    return [forward_activations(g, om) for g, om in zip(profile.generators, omegas)]


def _joint_actions(stacks: list[list[np.ndarray]]) -> np.ndarray:
    return np.concatenate([s[-1] for s in stacks], axis=1)


def _mean_cost(game: GameInstance, i: int, X: np.ndarray) -> float:
    # pairwise reduction so constant-generator estimates match at any
    # power-of-two batch size, bit for bit
    c = cost_batch(game, i, X)
    return float(pairwise_sum(c) / c.shape[0])


def _grad_blocks(
    profile: Profile,
    game: GameInstance,
    i: int,
    omegas: list[np.ndarray],
    stacks: list[list[np.ndarray]],
    players: Sequence[int] | None = None,
) -> list[np.ndarray]:
    """Per-player parameter blocks of the sampled gradient of F_i.

    ``players`` restricts which blocks are computed (others come back as
    None); the i-block alone is enough for the value estimator.
    """
    X = _joint_actions(stacks)
    B = X.shape[0]
    G = cost_grad_batch(game, i, X)
    wanted = range(profile.num_players) if players is None else players
    blocks: list[np.ndarray | None] = [None] * profile.num_players
    for k in wanted:
        sl = game.slices()[k]
        blocks[k] = (
            vjp_params_batch(profile.generators[k], omegas[k], G[:, sl], activations=stacks[k]) / B
        )
    return blocks


# ---------------------------------------------------------------------------
# public estimators
# ---------------------------------------------------------------------------


def estimate_F(
    profile: Profile, game: GameInstance, i: int, batches: Sequence[OmegaBatch]
) -> float:
    """Sample mean of f_i over one action draw per latent sample."""
    omegas = _check_inputs(profile, game, batches)
    stacks = _activation_stacks(profile, omegas)
    return _mean_cost(game, i, _joint_actions(stacks))


def estimate_grad_F(
    profile: Profile, game: GameInstance, i: int, batches: Sequence[OmegaBatch]
) -> np.ndarray:
    """Gradient of the F_i estimate w.r.t. ALL players' flat parameters.

    Block k is (1/B) sum_b vjp_params(gen_k, omega_k^b, grad_k f_i(actions_b)).
    """
    omegas = _check_inputs(profile, game, batches)
    stacks = _activation_stacks(profile, omegas)
    return np.concatenate(_grad_blocks(profile, game, i, omegas, stacks))


def mcgni_value(
    profile: Profile,
    game: GameInstance,
    config: MCGNIConfig,
    batches: Sequence[OmegaBatch],
) -> tuple[float, tuple[float, ...]]:
    """Local regret V and its per-player terms on one frozen batch.

    V_i compares F_i at the profile against F_i after player i's parameters
    take one steepest-descent step of radius lam, with the step direction
    estimated on the same batch (common random numbers).
    """
    omegas = _check_inputs(profile, game, batches)
    stacks = _activation_stacks(profile, omegas)
    X = _joint_actions(stacks)
    B = X.shape[0]
    per_player = []
    for i, sl in enumerate(game.slices()):
        base = _mean_cost(game, i, X)
        G = cost_grad_batch(game, i, X)
        gamma_i = (
            vjp_params_batch(profile.generators[i], omegas[i], G[:, sl], activations=stacks[i]) / B
        )
        shifted = axpy_params(profile.generators[i], gamma_i, -config.lam)
        X_shift = X.copy()
        X_shift[:, sl] = forward_activations(shifted, omegas[i])[-1]
        per_player.append(base - _mean_cost(game, i, X_shift))
    return float(sum(per_player)), tuple(per_player)


def fd_hvp(
    gradfn: Callable[[np.ndarray], np.ndarray],
    theta: np.ndarray,
    v: np.ndarray,
    eps0: float = 1e-4,
) -> np.ndarray:
    """Central-difference Hessian-vector product of a gradient map.

    [gradfn(theta + eps v) - gradfn(theta - eps v)] / (2 eps) with
    eps = eps0 (1 + ||theta||) / max(||v||, tiny); exact for linear maps.
    """
    theta = np.asarray(theta, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.shape != theta.shape:
        raise ValueError(f"direction shape {v.shape} != parameter shape {theta.shape}")
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0:
        return np.zeros_like(theta)
    eps = eps0 * (1.0 + float(np.linalg.norm(theta))) / max(vnorm, _TINY)
    out = (gradfn(theta + eps * v) - gradfn(theta - eps * v)) / (2.0 * eps)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("finite-difference HVP produced non-finite values")
    return out


def mcgni_grad(
    profile: Profile,
    game: GameInstance,
    config: MCGNIConfig,
    batches: Sequence[OmegaBatch],
) -> GradEstimate:
    """Sampled parameter gradient of the local regret V on one frozen batch.

    For each player i, with Gamma the gradient blocks of F_i and w the same
    blocks after shifting player i by -lam * Gamma_i, the contribution is
    Gamma - w plus, in exact mode, lam times the Hessian-vector product of
    the F_i gradient map with w's i-block (zero-padded elsewhere).  That HVP
    term is the chain-rule trace of the shift's dependence on the parameters;
    first_order mode drops it.
    """
    omegas = _check_inputs(profile, game, batches)
    stacks = _activation_stacks(profile, omegas)
    X = _joint_actions(stacks)
    B = X.shape[0]
    lengths = profile.param_lengths()
    total_blocks = [np.zeros(ln) for ln in lengths]
    per_player = []
    # ||theta|| over all players, part of the HVP step rule
    theta_norm = float(np.sqrt(sum(float(g.params @ g.params) for g in profile.generators)))
    for i, sl in enumerate(game.slices()):
        gamma = _grad_blocks(profile, game, i, omegas, stacks)
        shifted_gen = axpy_params(profile.generators[i], gamma[i], -config.lam)
        stacks_shift = list(stacks)
        stacks_shift[i] = forward_activations(shifted_gen, omegas[i])
        shifted_profile = _swap(profile, i, shifted_gen)
        w = _grad_blocks(shifted_profile, game, i, omegas, stacks_shift)
        for k in range(profile.num_players):
            total_blocks[k] += gamma[k] - w[k]
        if config.grad_mode == EXACT:
            # probe only player i's parameters: the padded direction is zero
            # on every other block, so the other players' activations and
            # latent batches are reused untouched
            vnorm = float(np.linalg.norm(w[i]))
            if vnorm > 0.0:
                eps = config.hvp_eps * (1.0 + theta_norm) / max(vnorm, _TINY)
                hvp = _probe_hvp(profile, game, i, omegas, stacks, w[i], eps)
                bad = [k for k, h in enumerate(hvp) if not np.all(np.isfinite(h))]
                if bad:
                    raise FloatingPointError(
                        f"non-finite HVP quotient in local-regret gradient, player {i}"
                    )
                for k in range(profile.num_players):
                    total_blocks[k] += config.lam * hvp[k]
        base = _mean_cost(game, i, X)
        X_shift = X.copy()
        X_shift[:, sl] = stacks_shift[i][-1]
        per_player.append(base - _mean_cost(game, i, X_shift))
    return GradEstimate(
        blocks=tuple(total_blocks),
        value=float(sum(per_player)),
        per_player=tuple(per_player),
    )


def _swap(profile: Profile, i: int, gen: Generator) -> Profile:
    gens = list(profile.generators)
    gens[i] = gen
    return Profile(generators=tuple(gens))


def _probe_hvp(
    profile: Profile,
    game: GameInstance,
    i: int,
    omegas: list[np.ndarray],
    stacks: list[list[np.ndarray]],
    v_i: np.ndarray,
    eps: float,
) -> list[np.ndarray]:
    """Central difference of the F_i gradient map along the i-block direction.

    Equivalent to fd_hvp on the concatenated parameter vector with the
    direction zero-padded outside block i, sharing the same step eps; only
    player i's forward pass is recomputed per probe.
    """
    out = []
    for sign in (1.0, -1.0):
        probe_gen = axpy_params(profile.generators[i], v_i, sign * eps)
        probe_stacks = list(stacks)
        probe_stacks[i] = forward_activations(probe_gen, omegas[i])
        out.append(_grad_blocks(_swap(profile, i, probe_gen), game, i, omegas, probe_stacks))
    return [(p - m) / (2.0 * eps) for p, m in zip(out[0], out[1])]


def snp_residual(
    profile: Profile, game: GameInstance, eval_batches: Sequence[OmegaBatch]
) -> float:
    """Stationarity residual: sum_i mean_b || Ehat_{j != i}[grad_i f_i] ||^2.

    The inner expectation for player i's sample b averages the own-cost
    gradient over other samples' actions for the opponents, leaving sample b
    itself out (capped at 64 inner samples for large batches).  The plain
    per-sample norm would be biased upward by within-batch variance.
    """
    omegas = _check_inputs(profile, game, eval_batches)
    stacks = _activation_stacks(profile, omegas)
    actions = [s[-1] for s in stacks]
    B = actions[0].shape[0]
    all_constant = all(g.variant == CONSTANT for g in profile.generators)
    if all_constant:
        X = np.concatenate([a[:1] for a in actions], axis=1)
        total = 0.0
        for i, sl in enumerate(game.slices()):
            g = cost_grad_batch(game, i, X)[0, sl]
            total += float(g @ g)
        return total
    if B < 2:
        raise ValueError("stationarity residual needs batch >= 2 with net generators")
    M = min(B - 1, _SNP_INNER_CAP)
    # inner indices for sample b: the M samples cyclically following b
    idx = (np.arange(B)[:, None] + 1 + np.arange(M)[None, :]) % B
    flat_idx = idx.ravel()
    total = 0.0
    for i, sl in enumerate(game.slices()):
        X_big = np.empty((B * M, game.total_dim))
        for k, slk in enumerate(game.slices()):
            if k == i:
                X_big[:, slk] = np.repeat(actions[i], M, axis=0)
            else:
                X_big[:, slk] = actions[k][flat_idx]
        inner = cost_grad_batch(game, i, X_big)[:, sl].reshape(B, M, -1).mean(axis=1)
        total += float((inner * inner).sum(axis=1).mean())
    return total
