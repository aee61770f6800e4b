"""Denoising autoencoder family for mix-design completion.

Three variants share one structure: a deterministic latent (dae), a
reparameterized Gaussian latent with a KL penalty (dvae), and a
deterministic latent with an MMD penalty against a standard-normal prior
(dwae). The cooperative encoder sees the corrupted design, the strength
target, and the mask bits; standalone baselines omit the mask bits and the
output clipping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nets
from .dataio import N_DESIGN, NormStats
from .errors import ConfigError, ContractError

VARIANTS = ("dae", "dvae", "dwae")


@dataclass
class ImputerConfig:
    variant: str = "dae"
    latent_dim: int = 16
    hidden: tuple = (64, 64)
    beta: float | None = None      # None -> variant default
    bandwidth: float | None = None  # None -> sqrt(latent_dim)
    use_mask_input: bool = True    # False for standalone baselines
    clip: bool = True              # False for standalone baselines
    epochs: int = 500
    patience: int = 50
    batch_size: int = 32
    lr: float = 1e-3
    val_fraction: float = 0.1
    max_masked_train: int = 5
    masked_only_loss: bool = False
    gen_noise: float = 0.1  # latent jitter when dwae samples extra candidates

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.beta is None:
            self.beta = {"dae": 0.0, "dvae": 1e-3, "dwae": 1e-1}[self.variant]
        if self.variant == "dae" and self.beta != 0.0:
            raise ConfigError("dae has no regularizer; beta must be 0")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.bandwidth is None:
            self.bandwidth = float(np.sqrt(self.latent_dim))

    @property
    def input_width(self) -> int:
        # corrupted design + strength target (+ mask bits for cooperative)
        return N_DESIGN + 1 + (N_DESIGN if self.use_mask_input else 0)


@dataclass
class ImputerModel:
    config: ImputerConfig
    encoder: nets.Mlp
    decoder: nets.Mlp
    stats: NormStats

    @property
    def variant(self) -> str:
        return self.config.variant


def init_imputer(cfg: ImputerConfig, stats: NormStats, seed: int) -> ImputerModel:
    enc_out = 2 * cfg.latent_dim if cfg.variant == "dvae" else cfg.latent_dim
    encoder = nets.init_mlp([cfg.input_width, *cfg.hidden, enc_out], seed=seed)
    decoder = nets.init_mlp([cfg.latent_dim, *cfg.hidden, N_DESIGN], seed=seed + 1)
    return ImputerModel(config=cfg, encoder=encoder, decoder=decoder, stats=stats)


@dataclass
class EncodeResult:
    z: np.ndarray
    mu: np.ndarray | None = None
    logvar: np.ndarray | None = None
    eps: np.ndarray | None = None
    cache: tuple | None = None  # encoder forward cache


def assemble_input(cfg: ImputerConfig, DC: np.ndarray, MM: np.ndarray,
                   target: np.ndarray) -> np.ndarray:
    """Column concatenation of corrupted design, target and (optionally)
    mask bits."""
    DC = np.atleast_2d(np.asarray(DC, dtype=np.float64))
    target = np.asarray(target, dtype=np.float64).reshape(-1, 1)
    if DC.shape[1] != N_DESIGN or target.shape[0] != DC.shape[0]:
        raise ContractError(f"shape mismatch: DC {DC.shape}, target {target.shape}")
    parts = [DC, target]
    if cfg.use_mask_input:
        MM = np.atleast_2d(np.asarray(MM, dtype=np.float64))
        if MM.shape != DC.shape:
            raise ContractError(f"mask shape {MM.shape} != design shape {DC.shape}")
        parts.append(MM)
    return np.concatenate(parts, axis=1)


def encode(model: ImputerModel, DC: np.ndarray, MM: np.ndarray,
           target: np.ndarray, rng: np.random.Generator | None = None,
           eps: np.ndarray | None = None) -> EncodeResult:
    """Latent batch for a corrupted batch. For dvae either a generator or an
    explicit standard-normal draw `eps` must be supplied."""
    x = assemble_input(model.config, DC, MM, target)
    out, cache = nets.forward_cached(model.encoder, x)
    if model.variant != "dvae":
        return EncodeResult(z=out, cache=cache)
    d = model.config.latent_dim
    mu, logvar = out[:, :d], out[:, d:]
    if eps is None:
        if rng is None:
            raise ContractError("dvae encode needs rng or explicit eps")
        eps = rng.standard_normal(mu.shape)
    z = mu + np.exp(0.5 * logvar) * eps
    return EncodeResult(z=z, mu=mu, logvar=logvar, eps=eps, cache=cache)


def decode_raw(model: ImputerModel, z: np.ndarray):
    return nets.forward_cached(model.decoder, z)


def clip_design(raw: np.ndarray) -> np.ndarray:
    """Constrain reconstructions to the training range; in normalized space
    that range is [0, 1] per feature."""
    return np.clip(raw, 0.0, 1.0)


def decode_and_clip(model: ImputerModel, z: np.ndarray) -> np.ndarray:
    raw, _ = decode_raw(model, z)
    return clip_design(raw) if model.config.clip else raw


def merge(Xhat: np.ndarray, DC: np.ndarray, MM: np.ndarray) -> np.ndarray:
    """Completed design: observed entries from DC, missing ones from Xhat."""
    Xhat = np.atleast_2d(np.asarray(Xhat, dtype=np.float64))
    DC = np.atleast_2d(np.asarray(DC, dtype=np.float64))
    MM = np.atleast_2d(np.asarray(MM, dtype=np.float64))
    if not (Xhat.shape == DC.shape == MM.shape) or Xhat.shape[1] != N_DESIGN:
        raise ContractError(
            f"shape mismatch: Xhat {Xhat.shape}, DC {DC.shape}, MM {MM.shape}")
    return (1.0 - MM) * Xhat + DC


def reconstruction_loss(Xprime: np.ndarray, X: np.ndarray) -> float:
    """Mean squared error over all rows and all 8 design columns."""
    loss, _ = nets.mse_loss_grad(np.atleast_2d(Xprime), np.atleast_2d(X))
    return loss


def kl_term(mu: np.ndarray, logvar: np.ndarray) -> float:
    """Batch-mean KL(q(z|x) || N(0, I)) for a diagonal Gaussian posterior."""
    mu = np.atleast_2d(mu)
    logvar = np.atleast_2d(logvar)
    per_sample = 0.5 * np.sum(mu * mu + np.exp(logvar) - logvar - 1.0, axis=1)
    return float(np.mean(per_sample))


def kl_grads(mu: np.ndarray, logvar: np.ndarray):
    """d(kl_term)/dmu and /dlogvar."""
    b = mu.shape[0]
    return mu / b, 0.5 * (np.exp(logvar) - 1.0) / b


def _rbf(a: np.ndarray, b: np.ndarray, bandwidth: float) -> np.ndarray:
    d2 = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * a @ b.T
    return np.exp(-np.maximum(d2, 0.0) / (2.0 * bandwidth * bandwidth))


def mmd_term(z: np.ndarray, prior: np.ndarray, bandwidth: float,
             biased: bool = False) -> float:
    """Empirical squared MMD with an RBF kernel between the encoded batch
    and a standard-normal prior batch. Unbiased by default (can be < 0)."""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    prior = np.atleast_2d(np.asarray(prior, dtype=np.float64))
    n, m = z.shape[0], prior.shape[0]
    if not biased and (n < 2 or m < 2):
        raise ContractError("unbiased MMD needs at least 2 samples per batch")
    kzz = _rbf(z, z, bandwidth)
    kpp = _rbf(prior, prior, bandwidth)
    kzp = _rbf(z, prior, bandwidth)
    if biased:
        return float(kzz.mean() + kpp.mean() - 2.0 * kzp.mean())
    szz = (kzz.sum() - np.trace(kzz)) / (n * (n - 1))
    spp = (kpp.sum() - np.trace(kpp)) / (m * (m - 1))
    return float(szz + spp - 2.0 * kzp.mean())


def mmd_grad_z(z: np.ndarray, prior: np.ndarray, bandwidth: float) -> np.ndarray:
    """Gradient of the unbiased MMD^2 estimate with respect to each z row."""
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    prior = np.atleast_2d(np.asarray(prior, dtype=np.float64))
    n, m = z.shape[0], prior.shape[0]
    if n < 2 or m < 2:
        raise ContractError("unbiased MMD needs at least 2 samples per batch")
    bw2 = bandwidth * bandwidth
    kzz = _rbf(z, z, bandwidth)
    np.fill_diagonal(kzz, 0.0)
    kzp = _rbf(z, prior, bandwidth)
    # d k(zi, zj)/d zi = k * (zj - zi) / bw^2; the zz double sum hits each
    # pair twice, once through each argument.
    g = (2.0 / (n * (n - 1) * bw2)) * (kzz @ z - kzz.sum(axis=1)[:, None] * z)
    g -= (2.0 / (n * m * bw2)) * (kzp @ prior - kzp.sum(axis=1)[:, None] * z)
    return g
