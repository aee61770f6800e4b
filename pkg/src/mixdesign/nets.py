"""Minimal dense-network engine: init, forward, hand-derived backprop, Adam.

Everything is float64 and deterministic per seed. Weight matrices are stored
(in, out) so a layer computes x @ W + b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ContractError, NumericError

RELU = "relu"
IDENTITY = "identity"


@dataclass
class Mlp:
    weights: list  # of (fan_in, fan_out) arrays
    biases: list   # of (fan_out,) arrays
    activations: list  # of "relu" / "identity" tags, one per layer

    @property
    def layer_sizes(self) -> list:
        sizes = [self.weights[0].shape[0]]
        sizes += [w.shape[1] for w in self.weights]
        return sizes

    def copy(self) -> "Mlp":
        return Mlp(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
        )


def init_mlp(layer_sizes, seed: int, activation: str = RELU) -> Mlp:
    """He-style fan-in init for hidden relu layers; identity output layer
    with 1/fan_in variance; zero biases."""
    sizes = list(layer_sizes)
    if len(sizes) < 2:
        raise ConfigError("need at least input and output sizes")
    if any(s <= 0 for s in sizes):
        raise ConfigError(f"layer sizes must be positive, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases, acts = [], [], []
    n_layers = len(sizes) - 1
    for i in range(n_layers):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        last = i == n_layers - 1
        act = IDENTITY if last else activation
        scale = np.sqrt((1.0 if act == IDENTITY else 2.0) / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
        acts.append(act)
    return Mlp(weights, biases, acts)


def forward(mlp: Mlp, x: np.ndarray) -> np.ndarray:
    out, _ = forward_cached(mlp, x)
    return out


def forward_cached(mlp: Mlp, x: np.ndarray):
    """Forward pass keeping per-layer pre-activations for backprop."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != mlp.weights[0].shape[0]:
        raise ContractError(
            f"input width {x.shape[1]} != first layer fan-in {mlp.weights[0].shape[0]}"
        )
    h = x
    inputs, preacts = [], []
    for li, (w, b, act) in enumerate(zip(mlp.weights, mlp.biases, mlp.activations)):
        inputs.append(h)
        z = h @ w + b
        if not np.all(np.isfinite(z)):
            raise NumericError(f"non-finite activation at layer {li}")
        preacts.append(z)
        h = np.maximum(z, 0.0) if act == RELU else z
    return h, (inputs, preacts)


def backward(mlp: Mlp, cache, dout: np.ndarray):
    """Backpropagate dL/dout; returns (grads, dL/dinput).

    grads is an Mlp-shaped (dweights, dbiases) pair of lists.
    """
    inputs, preacts = cache
    dW = [None] * len(mlp.weights)
    db = [None] * len(mlp.biases)
    d = np.asarray(dout, dtype=np.float64)
    for li in range(len(mlp.weights) - 1, -1, -1):
        if mlp.activations[li] == RELU:
            d = d * (preacts[li] > 0)
        dW[li] = inputs[li].T @ d
        db[li] = d.sum(axis=0)
        d = d @ mlp.weights[li].T
    return (dW, db), d


def zero_grads(mlp: Mlp):
    return ([np.zeros_like(w) for w in mlp.weights],
            [np.zeros_like(b) for b in mlp.biases])


def add_grads(acc, grads, scale: float = 1.0):
    for a, g in zip(acc[0], grads[0]):
        a += scale * g
    for a, g in zip(acc[1], grads[1]):
        a += scale * g
    return acc


def mse_loss_grad(pred: np.ndarray, target: np.ndarray):
    """Batch-mean squared error over all entries, with dL/dpred."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ContractError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    return loss, (2.0 / diff.size) * diff


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)  # [mW..., mb...]
    v: list = field(default_factory=list)

    @classmethod
    def for_mlp(cls, mlp: Mlp, lr: float = 1e-3, beta1: float = 0.9,
                beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        shapes = [np.zeros_like(w) for w in mlp.weights] + \
                 [np.zeros_like(b) for b in mlp.biases]
        return cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps, t=0,
                   m=shapes, v=[np.zeros_like(s) for s in shapes])


def adam_step(mlp: Mlp, grads, state: AdamState) -> tuple[Mlp, AdamState]:
    """Standard bias-corrected Adam update, in place."""
    flat = list(grads[0]) + list(grads[1])
    params = list(mlp.weights) + list(mlp.biases)
    if len(flat) != len(state.m):
        raise ContractError("gradient/accumulator shape mismatch")
    for g in flat:
        if not np.all(np.isfinite(g)):
            raise NumericError("non-finite gradient")
    state.t += 1
    b1t = 1.0 - state.beta1 ** state.t
    b2t = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, flat, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / b1t) / (np.sqrt(v / b2t) + state.eps)
    return mlp, state


def flatten_params(mlp: Mlp) -> np.ndarray:
    """All parameters as one vector (weights then biases, layer order)."""
    return np.concatenate([w.ravel() for w in mlp.weights] +
                          [b.ravel() for b in mlp.biases])


def set_params(mlp: Mlp, vec: np.ndarray) -> None:
    """Inverse of `flatten_params`, writing in place."""
    expected = sum(w.size for w in mlp.weights) + sum(b.size for b in mlp.biases)
    if vec.size != expected:
        raise ContractError(f"parameter vector length {vec.size}, expected {expected}")
    i = 0
    for w in mlp.weights:
        w[...] = vec[i:i + w.size].reshape(w.shape)
        i += w.size
    for b in mlp.biases:
        b[...] = vec[i:i + b.size].reshape(b.shape)
        i += b.size


def flatten_grads(grads) -> np.ndarray:
    return np.concatenate([g.ravel() for g in grads[0]] +
                          [g.ravel() for g in grads[1]])
