"""Generator networks that push uniform latent noise to mixed strategies.

A mixed strategy over a player's action space is represented as the
pushforward of U[0,1]^d through a parametric map.  Two variants:

* ``net``       -- a fully connected MLP with a flat parameter vector and
                   manual reverse-mode parameter gradients.
* ``constant``  -- a point mass; the flat parameter vector is the action
                   itself.  Every latent draw maps to the same action, so
                   a constant generator reduces the mixed-strategy pipeline
                   to pure-strategy optimization exactly.

All parameter arithmetic works on the flat vector, which keeps momentum
updates, finite-difference probes, and serialization trivial.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NET = "net"
CONSTANT = "constant"

DEFAULT_HIDDEN = (20, 40, 160, 160, 40, 20)
DEFAULT_ACTIVATIONS = ("tanh", "tanh", "tanh", "relu", "tanh", "tanh")

_ACTIVATIONS = frozenset({"tanh", "relu", "identity"})


@dataclass(frozen=True)
class Generator:
    """Immutable pushforward map with parameters stored as one flat vector."""

    variant: str
    latent_dim: int
    out_dim: int
    params: np.ndarray
    layer_sizes: tuple[int, ...] = ()
    activations: tuple[str, ...] = ()

    @property
    def num_params(self) -> int:
        return self.params.size


@dataclass(frozen=True)
class OmegaBatch:
    """A frozen batch of latent samples with a provenance tag."""

    samples: np.ndarray
    tag: str = ""

    @property
    def batch_size(self) -> int:
        return self.samples.shape[0]

    @property
    def latent_dim(self) -> int:
        return self.samples.shape[1]


@lru_cache(maxsize=None)
def _layout(layer_sizes: tuple[int, ...]) -> tuple[tuple[tuple[slice, slice, int, int], ...], int]:
    """Flat-vector layout: per affine layer the weight slice, bias slice,
    fan_in and fan_out.  Weights are stored row-major as (fan_in, fan_out)."""
    entries = []
    offset = 0
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        w = slice(offset, offset + fan_in * fan_out)
        offset += fan_in * fan_out
        b = slice(offset, offset + fan_out)
        offset += fan_out
        entries.append((w, b, fan_in, fan_out))
    return tuple(entries), offset


def flat_param_length(layer_sizes: tuple[int, ...]) -> int:
    return _layout(tuple(int(s) for s in layer_sizes))[1]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def pairwise_sum(a: np.ndarray) -> np.ndarray:
    """Sum over axis 0 by strict pairwise folding.

    For a batch of identical rows whose length is a power of two every
    partial sum is exact, so batch estimates collapse bit-exactly to the
    single-sample value; plain summation does not guarantee that (its
    unrolled partial counts are not all powers of two).
    """
    a = np.asarray(a)
    while a.shape[0] > 1:
        n2 = (a.shape[0] // 2) * 2
        head = a[0:n2:2] + a[1:n2:2]
        a = head if n2 == a.shape[0] else np.concatenate([head, a[n2:]], axis=0)
    return a[0]


def _validate_arch(layer_sizes: tuple[int, ...], activations: tuple[str, ...]) -> None:
    if len(layer_sizes) < 2 or any(s < 1 for s in layer_sizes):
        raise ValueError(f"layer_sizes needs >= 2 positive entries, got {layer_sizes}")
    if len(activations) != len(layer_sizes) - 2:
        raise ValueError(
            f"need one activation per hidden layer ({len(layer_sizes) - 2}), got {len(activations)}"
        )
    for name in activations:
        if name not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {name!r}; choose from {sorted(_ACTIVATIONS)}")


def make_net(
    latent_dim: int,
    out_dim: int,
    params: np.ndarray,
    hidden: tuple[int, ...] = DEFAULT_HIDDEN,
    activations: tuple[str, ...] | None = None,
) -> Generator:
    """Wrap an existing flat parameter vector as a net generator."""
    layer_sizes = (int(latent_dim),) + tuple(int(h) for h in hidden) + (int(out_dim),)
    if activations is None:
        activations = DEFAULT_ACTIVATIONS if hidden == DEFAULT_HIDDEN else ("tanh",) * len(hidden)
    activations = tuple(activations)
    _validate_arch(layer_sizes, activations)
    params = _freeze(params)
    want = flat_param_length(layer_sizes)
    if params.shape != (want,):
        raise ValueError(f"flat param shape {params.shape} != ({want},) for layers {layer_sizes}")
    return Generator(
        variant=NET,
        latent_dim=layer_sizes[0],
        out_dim=layer_sizes[-1],
        params=params,
        layer_sizes=layer_sizes,
        activations=activations,
    )


def make_constant(value: np.ndarray, latent_dim: int = 1) -> Generator:
    value = _freeze(np.atleast_1d(value))
    return Generator(
        variant=CONSTANT,
        latent_dim=int(latent_dim),
        out_dim=value.size,
        params=value,
    )


def init_generator(
    kind: str,
    d: int,
    n_i: int,
    seed: int,
    hidden: tuple[int, ...] = DEFAULT_HIDDEN,
    activations: tuple[str, ...] | None = None,
) -> Generator:
    """Seeded initialization.

    Net weights are i.i.d. Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out))
    per layer and zero biases; constant generators draw the point from
    Uniform(-0.5, 0.5)^{n_i}.
    """
    if d < 1 or n_i < 1:
        raise ValueError(f"need d >= 1 and n_i >= 1, got d={d}, n_i={n_i}")
    rng = np.random.default_rng(seed)
    if kind == CONSTANT:
        return make_constant(rng.uniform(-0.5, 0.5, n_i), latent_dim=d)
    if kind != NET:
        raise ValueError(f"unknown generator kind {kind!r}; choose 'net' or 'constant'")
    layer_sizes = (int(d),) + tuple(int(h) for h in hidden) + (int(n_i),)
    entries, total = _layout(layer_sizes)
    params = np.zeros(total)
    for w, _b, fan_in, fan_out in entries:
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        params[w] = rng.uniform(-bound, bound, fan_in * fan_out)
    return make_net(d, n_i, params, hidden=hidden, activations=activations)


def sample_omega(rng: np.random.Generator, B: int, d: int, tag: str = "") -> OmegaBatch:
    """Draw B i.i.d. latent points from U[0,1]^d, advancing rng in place."""
    if B < 1 or d < 1:
        raise ValueError(f"need B >= 1 and d >= 1, got B={B}, d={d}")
    return OmegaBatch(samples=_freeze(rng.random((B, d))), tag=tag)


# ---------------------------------------------------------------------------
# forward / reverse passes
# ---------------------------------------------------------------------------


def _apply_activation(name: str, Z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(Z)
    if name == "relu":
        return np.maximum(Z, 0.0)
    return Z


def _activation_deriv_from_output(name: str, H: np.ndarray) -> np.ndarray:
    # derivative expressed through the post-activation value, so the forward
    # pass only needs to store outputs
    if name == "tanh":
        return 1.0 - H * H
    if name == "relu":
        return (H > 0.0).astype(float)
    return np.ones_like(H)


def forward_activations(gen: Generator, Omega: np.ndarray) -> list[np.ndarray]:
    """All post-activation layer outputs, H[0] = Omega, H[-1] = actions.

    The returned list is what vjp_params_batch needs to skip its own forward
    pass; callers that evaluate a generator and then backpropagate through it
    should reuse it.  Constant generators return [Omega, broadcast actions].
    """
    Omega = np.asarray(Omega, dtype=float)
    if Omega.ndim != 2:
        raise ValueError(f"latent batch must be 2-d, got shape {Omega.shape}")
    if gen.variant == CONSTANT:
        return [Omega, np.broadcast_to(gen.params, (Omega.shape[0], gen.out_dim))]
    if Omega.shape[1] != gen.latent_dim:
        raise ValueError(f"latent dim {Omega.shape[1]} != generator latent dim {gen.latent_dim}")
    entries, _ = _layout(gen.layer_sizes)
    Hs = [Omega]
    H = Omega
    last = len(entries) - 1
    for k, (w, b, fan_in, fan_out) in enumerate(entries):
        W = gen.params[w].reshape(fan_in, fan_out)
        Z = H @ W + gen.params[b]
        H = Z if k == last else _apply_activation(gen.activations[k], Z)
        Hs.append(H)
    return Hs


def forward_batch(gen: Generator, Omega: np.ndarray) -> np.ndarray:
    """Map a (B, d) latent batch to a (B, n_i) action batch."""
    return forward_activations(gen, Omega)[-1]


def forward(gen: Generator, omega: np.ndarray) -> np.ndarray:
    """Map one latent point to an action vector."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    return forward_batch(gen, omega[None, :])[0]


def vjp_params_batch(
    gen: Generator,
    Omega: np.ndarray,
    Upstream: np.ndarray,
    activations: list[np.ndarray] | None = None,
) -> np.ndarray:
    """Sum over the batch of parameter-space VJPs.

    Returns sum_b (d forward(omega_b) / d params)^T upstream_b as one flat
    vector, which is exactly the gradient of sum_b <upstream_b, forward(omega_b)>
    when Upstream is treated as constant.  Pass the output of
    forward_activations to skip the internal forward pass.
    """
    Omega = np.asarray(Omega, dtype=float)
    Upstream = np.asarray(Upstream, dtype=float)
    if Upstream.shape != (Omega.shape[0], gen.out_dim):
        raise ValueError(
            f"upstream shape {Upstream.shape} != ({Omega.shape[0]}, {gen.out_dim})"
        )
    if gen.variant == CONSTANT:
        return pairwise_sum(Upstream)
    entries, total = _layout(gen.layer_sizes)
    Hs = forward_activations(gen, Omega) if activations is None else activations
    grad = np.empty(total)
    G = Upstream
    for k in range(len(entries) - 1, -1, -1):
        w, b, fan_in, fan_out = entries[k]
        grad[w] = (Hs[k].T @ G).ravel()
        grad[b] = G.sum(axis=0)
        if k > 0:
            W = gen.params[w].reshape(fan_in, fan_out)
            G = (G @ W.T) * _activation_deriv_from_output(gen.activations[k - 1], Hs[k])
    return grad


def vjp_params(gen: Generator, omega: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """(d forward / d params)^T upstream for one latent point."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    upstream = np.asarray(upstream, dtype=float)
    if upstream.shape != (gen.out_dim,):
        raise ValueError(f"upstream shape {upstream.shape} != ({gen.out_dim},)")
    return vjp_params_batch(gen, omega[None, :], upstream[None, :])


def axpy_params(gen: Generator, direction: np.ndarray, scale: float) -> Generator:
    """New generator with params + scale * direction; the input is unmodified."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != gen.params.shape:
        raise ValueError(f"direction shape {direction.shape} != {gen.params.shape}")
    return replace_params(gen, gen.params + scale * direction)


def replace_params(gen: Generator, params: np.ndarray) -> Generator:
    """New generator sharing the architecture with different flat params."""
    params = _freeze(params)
    if params.shape != gen.params.shape:
        raise ValueError(f"param shape {params.shape} != {gen.params.shape}")
    return Generator(
        variant=gen.variant,
        latent_dim=gen.latent_dim,
        out_dim=gen.out_dim,
        params=params,
        layer_sizes=gen.layer_sizes,
        activations=gen.activations,
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def generator_to_dict(gen: Generator) -> dict:
    return {
        "variant": gen.variant,
        "d": gen.latent_dim,
        "n_i": gen.out_dim,
        "layer_sizes": list(gen.layer_sizes),
        "activations": list(gen.activations),
        "params": gen.params.tolist(),
    }


def generator_from_dict(doc: dict) -> Generator:
    try:
        params = np.asarray(doc["params"], dtype=float)
        if doc["variant"] == CONSTANT:
            return make_constant(params, latent_dim=doc["d"])
        layer_sizes = tuple(doc["layer_sizes"])
        return make_net(
            doc["d"],
            doc["n_i"],
            params,
            hidden=layer_sizes[1:-1],
            activations=tuple(doc["activations"]),
        )
    except KeyError as exc:
        raise ValueError(f"generator document missing field {exc}") from None


def generator_to_json(gen: Generator) -> str:
    return json.dumps(generator_to_dict(gen))


def generator_from_json(text: str) -> Generator:
    return generator_from_dict(json.loads(text))
