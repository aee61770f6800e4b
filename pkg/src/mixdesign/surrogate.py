"""Forward strength model: dense net from a complete normalized design to
normalized compressive strength, trained on batch-mean squared error."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dataio, nets
from .dataio import Dataset, NormStats, N_DESIGN
from .errors import ContractError, TrainingError, ValidationError


@dataclass
class SurrogateConfig:
    hidden: tuple = (64, 64)
    epochs: int = 500
    patience: int = 50
    batch_size: int = 32
    lr: float = 1e-3
    val_fraction: float = 0.1


@dataclass
class SurrogateModel:
    net: nets.Mlp
    stats: NormStats
    config: SurrogateConfig = field(default_factory=SurrogateConfig)
    history: list = field(default_factory=list)  # (epoch, train_loss, val_loss)


def train_surrogate(train: Dataset, cfg: SurrogateConfig, seed: int,
                    stats: NormStats | None = None) -> SurrogateModel:
    """Fit the forward model on normalized (design, strength) pairs.

    10% of the training rows are held out for early stopping; the
    best-validation parameters are returned.
    """
    if len(train) == 0:
        raise ValidationError("empty training set")
    if stats is None:
        stats = dataio.fit_normalizer(train)
    Xn = dataio.normalize(train.design, stats)
    yn = dataio.normalize_strength(train.strength, stats)[:, None]

    rng = np.random.default_rng(seed)
    n = len(train)
    n_val = max(1, int(round(cfg.val_fraction * n))) if n >= 10 else 0
    perm = rng.permutation(n)
    val_idx, fit_idx = perm[:n_val], perm[n_val:]
    Xf, yf = Xn[fit_idx], yn[fit_idx]
    Xv, yv = Xn[val_idx], yn[val_idx]

    net = nets.init_mlp([N_DESIGN, *cfg.hidden, 1], seed=seed + 1)
    opt = nets.AdamState.for_mlp(net, lr=cfg.lr)
    best = nets.flatten_params(net).copy()
    best_val = np.inf
    stale = 0
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(Xf))
        for start in range(0, len(Xf), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            out, cache = nets.forward_cached(net, Xf[idx])
            loss, dout = nets.mse_loss_grad(out, yf[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"loss diverged at epoch {epoch}")
            grads, _ = nets.backward(net, cache, dout)
            nets.adam_step(net, grads, opt)
        train_loss, _ = nets.mse_loss_grad(nets.forward(net, Xf), yf)
        if n_val:
            val_loss, _ = nets.mse_loss_grad(nets.forward(net, Xv), yv)
        else:
            val_loss = train_loss
        history.append((epoch, float(train_loss), float(val_loss)))
        if val_loss < best_val - 1e-12:
            best_val = val_loss
            best = nets.flatten_params(net).copy()
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    nets.set_params(net, best)
    return SurrogateModel(net=net, stats=stats, config=cfg, history=history)


def predict_strength(model: SurrogateModel, Xn: np.ndarray) -> np.ndarray:
    """Normalized strength per row of a normalized (n, 8) design matrix."""
    Xn = np.atleast_2d(np.asarray(Xn, dtype=np.float64))
    if Xn.shape[1] != N_DESIGN:
        raise ContractError(f"expected {N_DESIGN} design columns, got {Xn.shape[1]}")
    return nets.forward(model.net, Xn)[:, 0]
