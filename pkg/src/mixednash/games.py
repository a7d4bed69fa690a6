"""Game abstraction and seeded benchmark-family generators.

A game instance bundles N players, their action-space dimensions, and a
cost function per player over the joint action vector.  All solvers in
this package minimize cost, so payoff-style games are stored negated.

Three families are provided:

* ``quadratic``       -- 2-player games f_i(x) = x^T Q_i x + r_i^T x.
* ``blotto``          -- 2-player budgeted resource-allocation games with a
                         smooth tanh battlefield payoff.  Solvers work on
                         unconstrained raw parameters; a smooth
                         exponential-normalization map enforces the budget.
* ``multiquadratic``  -- N-player quadratic games with r_i = 0 and entries
                         drawn from a selectable distribution.

Costs, gradients, and Hessian-vector products are exact analytic forms
except the Blotto HVP, which falls back to central differences of the
analytic gradient.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

QUADRATIC = "quadratic"
BLOTTO = "blotto"
MULTIQUADRATIC = "multiquadratic"
KINDS = (QUADRATIC, BLOTTO, MULTIQUADRATIC)

GAMUT_DISTRIBUTIONS = (
    "uniform01",
    "uniform_pm1",
    "normal",
    "exponential",
    "discrete",
)

_TINY = 1e-30


@dataclass(frozen=True)
class QuadraticPayload:
    """Per-player matrices Q_i (n x n) and offsets r_i (n,)."""

    Q: tuple[np.ndarray, ...]
    r: tuple[np.ndarray, ...]
    # symmetrized matrices Q_i + Q_i^T, precomputed for gradient/HVP paths
    S: tuple[np.ndarray, ...] = field(repr=False, default=())
    dist_id: str | None = None


@dataclass(frozen=True)
class BlottoPayload:
    """Battlefield count m and per-player budgets (X_1 <= X_2)."""

    m: int
    budgets: tuple[float, float]


@dataclass(frozen=True)
class GameInstance:
    """Immutable N-player continuous game.

    ``dims`` are the per-player dimensions of the vectors solvers operate
    on: the action dimension for quadratic games, the raw (pre-feasibility)
    parameter dimension m+1 for Blotto.
    """

    kind: str
    dims: tuple[int, ...]
    payload: QuadraticPayload | BlottoPayload
    seed: int | None = None

    @property
    def num_players(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def slices(self) -> list[slice]:
        """Per-player slices into the joint vector."""
        out, start = [], 0
        for d in self.dims:
            out.append(slice(start, start + d))
            start += d
        return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def make_quadratic(
    Q: Sequence[np.ndarray],
    r: Sequence[np.ndarray],
    dims: Sequence[int],
    seed: int | None = None,
    kind: str = QUADRATIC,
    dist_id: str | None = None,
) -> GameInstance:
    """Build a quadratic-family instance from explicit matrices.

    Accepts any N >= 1 so tests can build single-player oracles.
    """
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"dims must all be >= 1, got {dims}")
    n = sum(dims)
    if len(Q) != len(dims) or len(r) != len(dims):
        raise ValueError("need one Q matrix and one r vector per player")
    Qf, rf, Sf = [], [], []
    for Qi, ri in zip(Q, r):
        Qi = np.asarray(Qi, dtype=float)
        ri = np.asarray(ri, dtype=float)
        if Qi.shape != (n, n):
            raise ValueError(f"Q matrix shape {Qi.shape} != ({n}, {n})")
        if ri.shape != (n,):
            raise ValueError(f"r vector shape {ri.shape} != ({n},)")
        if not (np.all(np.isfinite(Qi)) and np.all(np.isfinite(ri))):
            raise ValueError("game matrices must be finite")
        Qf.append(_freeze(Qi))
        rf.append(_freeze(ri))
        Sf.append(_freeze(Qi + Qi.T))
    payload = QuadraticPayload(Q=tuple(Qf), r=tuple(rf), S=tuple(Sf), dist_id=dist_id)
    return GameInstance(kind=kind, dims=dims, payload=payload, seed=seed)


def make_blotto(m: int, budgets: tuple[float, float], seed: int | None = None) -> GameInstance:
    """Build a generalized Blotto instance; budgets are reordered so X_1 <= X_2."""
    m = int(m)
    if m < 1:
        raise ValueError(f"battlefield count must be >= 1, got {m}")
    x1, x2 = float(budgets[0]), float(budgets[1])
    if not (np.isfinite(x1) and np.isfinite(x2)) or min(x1, x2) <= 0:
        raise ValueError(f"budgets must be finite and positive, got {budgets}")
    if x1 > x2:
        x1, x2 = x2, x1
    payload = BlottoPayload(m=m, budgets=(x1, x2))
    return GameInstance(kind=BLOTTO, dims=(m + 1, m + 1), payload=payload, seed=seed)


# ---------------------------------------------------------------------------
# seeded generators
# ---------------------------------------------------------------------------


def _draw(rng: np.random.Generator, dist_id: str, shape) -> np.ndarray:
    if dist_id == "uniform01":
        return rng.random(shape)
    if dist_id == "uniform_pm1":
        return rng.uniform(-1.0, 1.0, shape)
    if dist_id == "normal":
        return rng.standard_normal(shape)
    if dist_id == "exponential":
        return rng.exponential(1.0, shape)
    if dist_id == "discrete":
        return rng.choice([-1.0, 0.0, 1.0], size=shape)
    raise ValueError(f"unknown entry distribution {dist_id!r}; choose from {GAMUT_DISTRIBUTIONS}")


def gen_quadratic(seed: int, n_i: int, entry_dist: str = "uniform01") -> GameInstance:
    """Random 2-player quadratic game; every Q/r entry i.i.d. from ``entry_dist``."""
    if n_i < 1:
        raise ValueError(f"n_i must be >= 1, got {n_i}")
    rng = np.random.default_rng(seed)
    n = 2 * n_i
    Q, r = [], []
    for _ in range(2):
        Q.append(_draw(rng, entry_dist, (n, n)))
        r.append(_draw(rng, entry_dist, (n,)))
    return make_quadratic(Q, r, dims=(n_i, n_i), seed=seed)


def gen_blotto(seed: int, m: int) -> GameInstance:
    """Random Blotto instance with budgets i.i.d. U(0,1), reordered X_1 <= X_2."""
    rng = np.random.default_rng(seed)
    budgets = rng.random(2)
    return make_blotto(m, (float(budgets[0]), float(budgets[1])), seed=seed)


def gen_gamut(seed: int, N: int, n_i: int, dist_id: str) -> GameInstance:
    """Random N-player quadratic game with r_i = 0 and Q entries from ``dist_id``."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if n_i < 1:
        raise ValueError(f"n_i must be >= 1, got {n_i}")
    if dist_id not in GAMUT_DISTRIBUTIONS:
        raise ValueError(f"unknown dist_id {dist_id!r}; choose from {GAMUT_DISTRIBUTIONS}")
    rng = np.random.default_rng(seed)
    n = N * n_i
    Q = [_draw(rng, dist_id, (n, n)) for _ in range(N)]
    r = [np.zeros(n) for _ in range(N)]
    return make_quadratic(Q, r, dims=(n_i,) * N, seed=seed, kind=MULTIQUADRATIC, dist_id=dist_id)


def gen_convex_quadratic(seed: int, n_i: int, N: int = 2, own_boost: float | None = None) -> GameInstance:
    """Random quadratic game whose own-action blocks are strongly positive
    definite, so each f_i is convex in the player's own action and the
    stacked own-gradient map has a unique zero (used by convergence oracles).

    The own block of Q_i is replaced by (C C^T + own_boost * I) / 2 with C
    standard normal; cross blocks keep U(0,1) entries.  ``own_boost``
    defaults to 2 * n_i + 2, which dominates the cross-block coupling.
    """
    if n_i < 1 or N < 1:
        raise ValueError("need n_i >= 1 and N >= 1")
    if own_boost is None:
        own_boost = 2.0 * n_i + 2.0
    rng = np.random.default_rng(seed)
    dims = (n_i,) * N
    n = N * n_i
    slices = [slice(k * n_i, (k + 1) * n_i) for k in range(N)]
    Q, r = [], []
    for i in range(N):
        Qi = rng.random((n, n))
        C = rng.standard_normal((n_i, n_i))
        Qi[slices[i], slices[i]] = 0.5 * (C @ C.T + own_boost * np.eye(n_i))
        Q.append(Qi)
        r.append(rng.random(n))
    return make_quadratic(Q, r, dims=dims, seed=seed)


def stationary_point(game: GameInstance) -> np.ndarray:
    """Closed-form joint point where every player's own gradient vanishes.

    Solves the stacked linear system M x = -r_tilde built from the i-rows of
    each Q_i + Q_i^T.  Quadratic-family games only.
    """
    M, rhs = own_gradient_operator(game)
    return np.linalg.solve(M, -rhs)


def own_gradient_operator(game: GameInstance) -> tuple[np.ndarray, np.ndarray]:
    """Return (M, r_tilde) with stacked own-gradients xi(x) = M x + r_tilde."""
    if not isinstance(game.payload, QuadraticPayload):
        raise ValueError("closed-form own-gradient operator exists only for quadratic games")
    n = game.total_dim
    M = np.zeros((n, n))
    rhs = np.zeros(n)
    for i, sl in enumerate(game.slices()):
        M[sl, :] = game.payload.S[i][sl, :]
        rhs[sl] = game.payload.r[i][sl]
    return M, rhs


def gradient_lipschitz_bound(game: GameInstance) -> float:
    """max_i ||Q_i + Q_i^T||_2, the Lipschitz constant of each cost gradient."""
    if not isinstance(game.payload, QuadraticPayload):
        raise ValueError("analytic Lipschitz bound available only for quadratic games")
    return max(float(np.linalg.norm(S, 2)) for S in game.payload.S)


# ---------------------------------------------------------------------------
# cost / gradient / HVP
# ---------------------------------------------------------------------------


def _check_point(game: GameInstance, i: int, x: np.ndarray) -> np.ndarray:
    if not 0 <= i < game.num_players:
        raise IndexError(f"player index {i} out of range for {game.num_players} players")
    x = np.asarray(x, dtype=float)
    if x.shape != (game.total_dim,):
        raise ValueError(f"joint vector shape {x.shape} != ({game.total_dim},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("joint vector has non-finite entries")
    return x


def feasible_map(game: GameInstance, i: int, z: np.ndarray) -> np.ndarray:
    """Map a raw Blotto vector z in R^{m+1} to a feasible allocation in R^m.

    x = X_i * normexp(z)[:m] where normexp is the exponential normalization
    over all m+1 coordinates (the last one is slack), so x_j > 0 and
    sum_j x_j < X_i for every finite z.
    """
    if not isinstance(game.payload, BlottoPayload):
        raise ValueError("feasible_map applies to Blotto games only")
    if not 0 <= i < game.num_players:
        raise IndexError(f"player index {i} out of range")
    z = np.asarray(z, dtype=float)
    m = game.payload.m
    if z.shape != (m + 1,):
        raise ValueError(f"raw vector shape {z.shape} != ({m + 1},)")
    if not np.all(np.isfinite(z)):
        raise ValueError("raw vector has non-finite entries")
    w = _normexp(z[None, :])[0]
    return game.payload.budgets[i] * w[:m]


def _normexp(Z: np.ndarray) -> np.ndarray:
    """Row-wise exponential normalization, stable for entries up to ~1e3."""
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _blotto_allocations(game: GameInstance, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a (B, 2(m+1)) raw batch into normexp weights and allocations."""
    m = game.payload.m
    Z0, Z1 = X[:, : m + 1], X[:, m + 1 :]
    w0, w1 = _normexp(Z0), _normexp(Z1)
    a0 = game.payload.budgets[0] * w0[:, :m]
    a1 = game.payload.budgets[1] * w1[:, :m]
    return w0, w1, a0, a1


def cost_batch(game: GameInstance, i: int, X: np.ndarray) -> np.ndarray:
    """Vectorized cost over rows of X, shape (B, n) -> (B,)."""
    X = np.asarray(X, dtype=float)
    if isinstance(game.payload, QuadraticPayload):
        Qi, ri = game.payload.Q[i], game.payload.r[i]
        return np.einsum("bi,ij,bj->b", X, Qi, X) + np.einsum("bj,j->b", X, ri)
    _, _, a0, a1 = _blotto_allocations(game, X)
    t = np.tanh(a0 - a1)
    # payoff of player i is sum_j tanh(a_i - a_{-i}); cost is its negation
    s = t.sum(axis=1)
    return -s if i == 0 else s


def cost(game: GameInstance, i: int, x: np.ndarray) -> float:
    """Cost f_i at the joint vector x (raw coordinates for Blotto)."""
    x = _check_point(game, i, x)
    return float(cost_batch(game, i, x[None, :])[0])


def cost_grad_batch(game: GameInstance, i: int, X: np.ndarray) -> np.ndarray:
    """Vectorized analytic gradient of f_i w.r.t. the full joint vector."""
    X = np.asarray(X, dtype=float)
    if isinstance(game.payload, QuadraticPayload):
        # einsum keeps the per-row reduction order independent of the batch
        # shape (BLAS matmul does not), so constant-generator estimates stay
        # bit-identical across batch sizes
        return np.einsum("bj,jk->bk", X, game.payload.S[i]) + game.payload.r[i]
    m = game.payload.m
    w0, w1, a0, a1 = _blotto_allocations(game, X)
    u = 1.0 - np.tanh(a0 - a1) ** 2
    # dc_i/da_0 = -u and dc_i/da_1 = +u for i=0; signs flip for i=1
    da0 = -u if i == 0 else u
    da1 = u if i == 0 else -u
    out = np.empty_like(X)
    out[:, : m + 1] = _normexp_vjp(w0, da0, game.payload.budgets[0])
    out[:, m + 1 :] = _normexp_vjp(w1, da1, game.payload.budgets[1])
    return out


def _normexp_vjp(w: np.ndarray, v: np.ndarray, budget: float) -> np.ndarray:
    """J^T v for the map z -> budget * normexp(z)[:m]; w = normexp(z), v is (B, m)."""
    inner = np.einsum("bj,bj->b", w[:, :-1], v)
    vpad = np.concatenate([v, np.zeros((v.shape[0], 1))], axis=1)
    return budget * w * (vpad - inner[:, None])


def cost_grad(game: GameInstance, i: int, x: np.ndarray) -> np.ndarray:
    """Exact gradient of f_i w.r.t. the full joint vector x."""
    x = _check_point(game, i, x)
    return cost_grad_batch(game, i, x[None, :])[0]


def cost_hvp(
    game: GameInstance,
    i: int,
    x: np.ndarray,
    v: np.ndarray,
    eps0: float = 1e-5,
) -> np.ndarray:
    """Hessian-vector product H_{f_i}(x) v.

    Exact (Q_i + Q_i^T) v for quadratic games; otherwise a central finite
    difference of cost_grad with step eps0 * (1 + ||x||) / max(||v||, tiny).
    """
    x = _check_point(game, i, x)
    v = np.asarray(v, dtype=float)
    if v.shape != x.shape:
        raise ValueError(f"direction shape {v.shape} != {x.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("direction has non-finite entries")
    if isinstance(game.payload, QuadraticPayload):
        return game.payload.S[i] @ v
    vnorm = float(np.linalg.norm(v))
    if vnorm == 0.0:
        return np.zeros_like(v)
    eps = eps0 * (1.0 + float(np.linalg.norm(x))) / max(vnorm, _TINY)
    return (cost_grad(game, i, x + eps * v) - cost_grad(game, i, x - eps * v)) / (2.0 * eps)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def game_to_dict(game: GameInstance) -> dict:
    """JSON-ready document; float values round-trip bit-exactly."""
    doc: dict = {"kind": game.kind, "seed": game.seed, "dims": list(game.dims)}
    if isinstance(game.payload, QuadraticPayload):
        doc["Q"] = [Qi.tolist() for Qi in game.payload.Q]
        doc["r"] = [ri.tolist() for ri in game.payload.r]
        if game.payload.dist_id is not None:
            doc["dist_id"] = game.payload.dist_id
    else:
        doc["m"] = game.payload.m
        doc["budgets"] = list(game.payload.budgets)
    return doc


def game_from_dict(doc: dict) -> GameInstance:
    try:
        kind = doc["kind"]
        if kind not in KINDS:
            raise ValueError(f"unknown game kind {kind!r}")
        if kind == BLOTTO:
            return make_blotto(doc["m"], tuple(doc["budgets"]), seed=doc.get("seed"))
        return make_quadratic(
            [np.asarray(Qi) for Qi in doc["Q"]],
            [np.asarray(ri) for ri in doc["r"]],
            dims=doc["dims"],
            seed=doc.get("seed"),
            kind=kind,
            dist_id=doc.get("dist_id"),
        )
    except KeyError as exc:
        raise ValueError(f"game document missing field {exc}") from None


def game_to_json(game: GameInstance) -> str:
    return json.dumps(game_to_dict(game))


def game_from_json(text: str) -> GameInstance:
    return game_from_dict(json.loads(text))
