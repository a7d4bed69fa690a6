"""Pure-strategy baselines: gradient descent on the local regret, and SGA.

Both operate on the raw joint action vector (Blotto reparametrization
included), never on generator parameters.  The local-regret function here is
the pure-strategy specialization of the mixed-strategy machinery in
``mcgni``; with point-mass generators the two agree to rounding, which the
tests pin down.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .games import GameInstance, cost_batch, cost_grad, cost_grad_batch, cost_hvp

EXACT = "exact"
FIRST_ORDER = "first_order"

DEFAULT_SGA_LAMBDA = 1.0
DEFAULT_SGA_FD_EPS = 1e-5


@dataclass(frozen=True)
class PureProfile:
    """A joint action vector in raw (pre-feasibility) coordinates."""

    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        if x.ndim != 1:
            raise ValueError(f"joint action must be a vector, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ValueError("joint action has non-finite entries")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)


def _check_x(game: GameInstance, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (game.total_dim,):
        raise ValueError(f"joint vector shape {x.shape} != ({game.total_dim},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("joint vector has non-finite entries")
    return x


def simultaneous_gradient(x: np.ndarray, game: GameInstance) -> np.ndarray:
    """Concatenation of each player's own-cost own-action gradient."""
    x = _check_x(game, x)
    out = np.empty_like(x)
    for i, sl in enumerate(game.slices()):
        out[sl] = cost_grad(game, i, x)[sl]
    return out


def gni_value(x: np.ndarray, game: GameInstance, lam: float) -> float:
    """Pure-strategy local regret.

    Sum over players of f_i(x) minus f_i after player i alone steps its own
    coordinates by -lam times its own gradient.
    """
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    x = _check_x(game, x)
    total = 0.0
    for i, sl in enumerate(game.slices()):
        g = cost_grad(game, i, x)
        shifted = x.copy()
        shifted[sl] -= lam * g[sl]
        term = cost_batch(game, i, x[None, :])[0] - cost_batch(game, i, shifted[None, :])[0]
        total += float(term)
    if not np.isfinite(total):
        raise FloatingPointError("local regret evaluated to a non-finite value")
    return total


def gni_grad(x: np.ndarray, game: GameInstance, lam: float, mode: str = EXACT) -> np.ndarray:
    """Gradient of the pure-strategy local regret w.r.t. the joint vector.

    Exact mode carries the shift's Jacobian through a Hessian-vector product;
    first_order mode keeps only the difference of the two gradients.
    """
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    if mode not in (EXACT, FIRST_ORDER):
        raise ValueError(f"mode must be 'exact' or 'first_order', got {mode!r}")
    x = _check_x(game, x)
    total = np.zeros_like(x)
    for i, sl in enumerate(game.slices()):
        g = cost_grad(game, i, x)
        shifted = x.copy()
        shifted[sl] -= lam * g[sl]
        w = cost_grad(game, i, shifted)
        total += g - w
        if mode == EXACT:
            pad = np.zeros_like(x)
            pad[sl] = w[sl]
            total += lam * cost_hvp(game, i, x, pad)
    if not np.all(np.isfinite(total)):
        raise FloatingPointError("local-regret gradient has non-finite entries")
    return total


def sga_direction(
    x: np.ndarray,
    game: GameInstance,
    lam_sga: float = DEFAULT_SGA_LAMBDA,
    fd_eps: float = DEFAULT_SGA_FD_EPS,
) -> np.ndarray:
    """Symplectic gradient adjustment direction xi + lam_sga * A^T xi.

    xi stacks the players' own gradients; A is the antisymmetric part of the
    finite-difference Jacobian of xi (central differences, column step
    fd_eps * (1 + ||x||)).
    """
    if not np.isfinite(lam_sga):
        raise ValueError(f"lam_sga must be finite, got {lam_sga}")
    x = _check_x(game, x)
    n = x.size
    xi = simultaneous_gradient(x, game)
    h = fd_eps * (1.0 + float(np.linalg.norm(x)))
    # probe all coordinate directions in one batch per player
    probes = np.repeat(x[None, :], 2 * n, axis=0)
    rows = np.arange(n)
    probes[rows, rows] += h
    probes[n + rows, rows] -= h
    J = np.empty((n, n))
    for i, sl in enumerate(game.slices()):
        G = cost_grad_batch(game, i, probes)[:, sl]
        J[sl, :] = (G[:n] - G[n:]).T / (2.0 * h)
    if not np.all(np.isfinite(J)):
        raise FloatingPointError("finite-difference Jacobian has non-finite entries")
    A = 0.5 * (J - J.T)
    return xi + lam_sga * (A.T @ xi)


def baseline_step(x: np.ndarray, direction: np.ndarray, rho: float) -> PureProfile:
    """Plain descent step x - rho * direction."""
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if direction.shape != x.shape:
        raise ValueError(f"direction shape {direction.shape} != {x.shape}")
    return PureProfile(x=x - rho * direction)
