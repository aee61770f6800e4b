"""Couples the imputer with the strength surrogate.

Training blends the reconstruction error of completed designs with the
surrogate's strength-prediction error, alpha-weighted; gradients flow
through the (usually frozen) surrogate back into the imputer. Inference
completes a partially fixed design in one forward pass.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import dataio, imputer as imp_mod, nets, surrogate as sur_mod
from .dataio import DESIGN_VARS, Dataset, N_DESIGN, NormStats
from .errors import ConfigError, QueryError, TrainingError, ValidationError
from .imputer import ImputerConfig, ImputerModel
from .surrogate import SurrogateConfig, SurrogateModel


@dataclass
class CoopConfig:
    alpha: float = 0.5
    variant: str = "dae"
    epochs: int = 500
    patience: int = 50
    batch_size: int = 32
    seed: int = 0
    surrogate_mode: str = "frozen"  # or "joint"
    max_masked_train: int = 5
    lr: float = 1e-3
    latent_dim: int = 16
    hidden: tuple = (64, 64)
    beta: float | None = None
    bandwidth: float | None = None
    gen_noise: float = 0.1  # latent jitter for dwae candidate sampling
    standalone: bool = False  # baseline: no mask input, no clip, no L2
    masked_only_loss: bool = False
    val_fraction: float = 0.1  # 0 disables the holdout and early stopping

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.val_fraction < 0.5:
            raise ConfigError("val_fraction must be in [0, 0.5)")
        if not 1 <= self.max_masked_train <= 5:
            raise ConfigError("max_masked_train must be in [1, 5]")
        if self.surrogate_mode not in ("frozen", "joint"):
            raise ConfigError(f"unknown surrogate_mode {self.surrogate_mode!r}")

    def imputer_config(self) -> ImputerConfig:
        return ImputerConfig(
            variant=self.variant,
            latent_dim=self.latent_dim,
            hidden=self.hidden,
            beta=self.beta,
            bandwidth=self.bandwidth,
            use_mask_input=not self.standalone,
            clip=not self.standalone,
            epochs=self.epochs,
            patience=self.patience,
            batch_size=self.batch_size,
            lr=self.lr,
            max_masked_train=self.max_masked_train,
            masked_only_loss=self.masked_only_loss,
            gen_noise=self.gen_noise,
        )


def cooperative_loss(l1: float, l2: float, alpha: float,
                     reg: float = 0.0, beta: float = 0.0) -> float:
    """alpha * L1 + (1 - alpha) * L2, plus the variant's regularizer."""
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")
    return alpha * l1 + (1.0 - alpha) * l2 + beta * reg


def loss_and_grads(imp: ImputerModel, X: np.ndarray, y: np.ndarray,
                   MM: np.ndarray, alpha: float,
                   sur: SurrogateModel | None = None,
                   eps: np.ndarray | None = None,
                   prior: np.ndarray | None = None):
    """Full composite forward/backward for one batch.

    X is the clean normalized (b, 8) design batch, y the normalized measured
    strengths, MM the corruption mask. For dvae `eps` must be the
    standard-normal draw; for dwae `prior` must be the prior latent batch.
    With alpha < 1 a surrogate is required; its gradients are returned but
    applying them is the caller's choice (frozen vs joint).

    Returns (losses, enc_grads, dec_grads, sur_grads) where losses is a dict
    with keys l1, l2, reg, total.
    """
    cfg = imp.config
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    MM = np.atleast_2d(np.asarray(MM, dtype=np.float64))
    DC = dataio.corrupt(X, MM)

    enc = imp_mod.encode(imp, DC, MM, y, eps=eps) if cfg.variant == "dvae" \
        else imp_mod.encode(imp, DC, MM, y)
    raw, dec_cache = imp_mod.decode_raw(imp, enc.z)
    if cfg.clip:
        Xhat = imp_mod.clip_design(raw)
        gate = ((raw > 0.0) & (raw < 1.0)).astype(np.float64)
    else:
        Xhat = raw
        gate = np.ones_like(raw)
    Xp = imp_mod.merge(Xhat, DC, MM)

    if cfg.masked_only_loss:
        hidden = 1.0 - MM
        denom = max(hidden.sum(), 1.0)
        diff = (Xp - X) * hidden
        l1 = float((diff * diff).sum() / denom)
        dXp_l1 = 2.0 * diff / denom
    else:
        l1, dXp_l1 = nets.mse_loss_grad(Xp, X)

    l2 = 0.0
    dXp_l2 = np.zeros_like(Xp)
    sur_grads = None
    if alpha < 1.0:
        if sur is None:
            raise ConfigError("alpha < 1 requires a surrogate")
        pred, sur_cache = nets.forward_cached(sur.net, Xp)
        l2, dpred = nets.mse_loss_grad(pred, y[:, None])
        sur_grads, dXp_l2 = nets.backward(sur.net, sur_cache, dpred)
        # sur_grads are reported against the total loss, like the others
        sur_grads = ([ (1.0 - alpha) * g for g in sur_grads[0]],
                     [(1.0 - alpha) * g for g in sur_grads[1]])

    reg = 0.0
    beta = cfg.beta
    if cfg.variant == "dvae":
        reg = imp_mod.kl_term(enc.mu, enc.logvar)
    elif cfg.variant == "dwae":
        if prior is None:
            raise ConfigError("dwae loss requires a prior latent batch")
        reg = imp_mod.mmd_term(enc.z, prior, cfg.bandwidth)

    total = cooperative_loss(l1, l2, alpha, reg=reg, beta=beta)

    dXp = alpha * dXp_l1 + (1.0 - alpha) * dXp_l2
    dXhat = (1.0 - MM) * dXp
    dec_grads, dz = nets.backward(imp.decoder, dec_cache, dXhat * gate)
    if cfg.variant == "dwae":
        dz = dz + beta * imp_mod.mmd_grad_z(enc.z, prior, cfg.bandwidth)
    if cfg.variant == "dvae":
        dmu_kl, dlogvar_kl = imp_mod.kl_grads(enc.mu, enc.logvar)
        dmu = dz + beta * dmu_kl
        dlogvar = dz * enc.eps * 0.5 * np.exp(0.5 * enc.logvar) + beta * dlogvar_kl
        denc_out = np.concatenate([dmu, dlogvar], axis=1)
    else:
        denc_out = dz
    enc_grads, _ = nets.backward(imp.encoder, enc.cache, denc_out)

    losses = {"l1": l1, "l2": l2, "reg": reg, "total": total}
    return losses, enc_grads, dec_grads, sur_grads


@dataclass
class TrainLog:
    epochs: list = field(default_factory=list)  # (epoch, l1, l2, total, val)


def train_conn(train: Dataset, cfg: CoopConfig,
               sur: SurrogateModel | None = None,
               sur_cfg: SurrogateConfig | None = None,
               stats: NormStats | None = None):
    """Two-stage training: pretrain the surrogate on clean designs, then
    train the imputer against the composite loss with gradients flowing
    through the surrogate.

    Returns (imputer, surrogate, log). For cfg.standalone the surrogate
    stage is skipped and alpha is forced to 1 (reconstruction only).
    """
    if len(train) == 0:
        raise ValidationError("empty training set")
    if stats is None:
        stats = dataio.fit_normalizer(train)
    alpha = 1.0 if cfg.standalone else cfg.alpha
    if not cfg.standalone and sur is None:
        sur = sur_mod.train_surrogate(
            train, sur_cfg or SurrogateConfig(), seed=cfg.seed, stats=stats)

    icfg = cfg.imputer_config()
    imp = imp_mod.init_imputer(icfg, stats, seed=cfg.seed + 100)
    rng = np.random.default_rng(cfg.seed + 200)

    Xn = dataio.normalize(train.design, stats)
    yn = dataio.normalize_strength(train.strength, stats)

    n = len(train)
    n_val = max(1, int(round(cfg.val_fraction * n))) \
        if (cfg.val_fraction > 0 and n >= 10) else 0
    perm = rng.permutation(n)
    val_idx, fit_idx = perm[:n_val], perm[n_val:]
    Xf, yf = Xn[fit_idx], yn[fit_idx]
    Xv, yv = Xn[val_idx], yn[val_idx]
    # frozen validation corruption keeps the early-stopping signal stable
    val_MM = dataio.sample_training_masks(max(len(Xv), 1), cfg.max_masked_train,
                                          np.random.default_rng(cfg.seed + 300))
    val_eps = np.random.default_rng(cfg.seed + 301).standard_normal(
        (max(len(Xv), 1), icfg.latent_dim))
    val_prior = np.random.default_rng(cfg.seed + 302).standard_normal(
        (max(len(Xv), 1), icfg.latent_dim))

    opt_enc = nets.AdamState.for_mlp(imp.encoder, lr=cfg.lr)
    opt_dec = nets.AdamState.for_mlp(imp.decoder, lr=cfg.lr)
    opt_sur = None
    if cfg.surrogate_mode == "joint" and sur is not None:
        opt_sur = nets.AdamState.for_mlp(sur.net, lr=cfg.lr)

    best = (nets.flatten_params(imp.encoder).copy(),
            nets.flatten_params(imp.decoder).copy(),
            nets.flatten_params(sur.net).copy() if sur is not None else None)
    best_val = np.inf
    stale = 0
    log = TrainLog()

    for epoch in range(cfg.epochs):
        MM_epoch = dataio.sample_training_masks(len(Xf), cfg.max_masked_train, rng)
        order = rng.permutation(len(Xf))
        ep_l1 = ep_l2 = ep_tot = 0.0
        n_batches = 0
        for start in range(0, len(Xf), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            eps = rng.standard_normal((len(idx), icfg.latent_dim)) \
                if icfg.variant == "dvae" else None
            prior = rng.standard_normal((len(idx), icfg.latent_dim)) \
                if icfg.variant == "dwae" else None
            if icfg.variant == "dwae" and len(idx) < 2:
                continue  # unbiased MMD undefined on a single sample
            losses, g_enc, g_dec, g_sur = loss_and_grads(
                imp, Xf[idx], yf[idx], MM_epoch[idx], alpha,
                sur=sur if alpha < 1.0 else None, eps=eps, prior=prior)
            if not np.isfinite(losses["total"]):
                raise TrainingError(f"loss diverged at epoch {epoch}")
            nets.adam_step(imp.encoder, g_enc, opt_enc)
            nets.adam_step(imp.decoder, g_dec, opt_dec)
            if opt_sur is not None and g_sur is not None:
                nets.adam_step(sur.net, g_sur, opt_sur)
            ep_l1 += losses["l1"]
            ep_l2 += losses["l2"]
            ep_tot += losses["total"]
            n_batches += 1

        if n_val:
            vl, *_ = loss_and_grads(
                imp, Xv, yv, val_MM[:len(Xv)], alpha,
                sur=sur if alpha < 1.0 else None,
                eps=val_eps[:len(Xv)] if icfg.variant == "dvae" else None,
                prior=val_prior[:len(Xv)] if icfg.variant == "dwae" else None)
            val_metric = vl["total"]
        else:
            val_metric = ep_tot / max(n_batches, 1)
        log.epochs.append((epoch, ep_l1 / max(n_batches, 1),
                           ep_l2 / max(n_batches, 1),
                           ep_tot / max(n_batches, 1), val_metric))
        if val_metric < best_val - 1e-12:
            best_val = val_metric
            best = (nets.flatten_params(imp.encoder).copy(),
                    nets.flatten_params(imp.decoder).copy(),
                    nets.flatten_params(sur.net).copy() if sur is not None else None)
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    nets.set_params(imp.encoder, best[0])
    nets.set_params(imp.decoder, best[1])
    if sur is not None and best[2] is not None:
        nets.set_params(sur.net, best[2])
    return imp, sur, log


def train_standalone(train: Dataset, cfg: CoopConfig, stats: NormStats | None = None):
    """Baseline: same backbone without mask input, clipping or the
    surrogate-coupled loss."""
    base = CoopConfig(**{**cfg.__dict__, "standalone": True, "alpha": 1.0})
    imp, _, log = train_conn(train, base, stats=stats)
    return imp, log


def complete(imp: ImputerModel, DC: np.ndarray, MM: np.ndarray,
             target_n: np.ndarray, eps: np.ndarray | None = None) -> np.ndarray:
    """Deterministic one-pass completion of a corrupted normalized batch.

    dvae uses the posterior mean latent unless an explicit eps is given.
    """
    if imp.config.variant == "dvae" and eps is None:
        eps = np.zeros((np.atleast_2d(DC).shape[0], imp.config.latent_dim))
    enc = imp_mod.encode(imp, DC, MM, target_n, eps=eps)
    Xhat = imp_mod.decode_and_clip(imp, enc.z)
    return imp_mod.merge(Xhat, np.atleast_2d(DC), np.atleast_2d(MM))


@dataclass
class InverseQuery:
    fixed: dict
    target_strength: float
    num_candidates: int = 1
    seed: int = 0

    def __post_init__(self):
        unknown = set(self.fixed) - set(DESIGN_VARS)
        if unknown:
            raise QueryError(f"unknown variable(s): {', '.join(sorted(unknown))}")
        if self.target_strength <= 0:
            raise QueryError("target_strength must be > 0")
        if self.num_candidates < 1:
            raise QueryError("num_candidates must be >= 1")


def infer_partial(imp: ImputerModel, sur: SurrogateModel, stats: NormStats,
                  query: InverseQuery):
    """One forward pass per candidate: mask the free variables, feed the
    normalized fixed values and target, decode, clip, merge, denormalize.

    Returns a list of (design dict in raw units, predicted strength MPa).
    """
    if imp.variant == "dae" and query.num_candidates > 1:
        raise QueryError("dae is deterministic; num_candidates must be 1")

    MM = np.zeros((1, N_DESIGN))
    DC = np.zeros((1, N_DESIGN))
    fixed_norm = {}
    for name, value in query.fixed.items():
        j = DESIGN_VARS.index(name)
        lo, hi = stats.mins[j], stats.maxs[j]
        span = hi - lo
        vn = (value - lo) / span if span > 0 else 0.0
        if vn < 0.0 or vn > 1.0:
            warnings.warn(
                f"{name}={value} outside training range [{lo}, {hi}]; clamped",
                stacklevel=2)
            vn = min(max(vn, 0.0), 1.0)
        MM[0, j] = 1.0
        DC[0, j] = vn
        fixed_norm[j] = vn
    tn = np.asarray([dataio.normalize_strength(query.target_strength, stats)])

    rng = np.random.default_rng(query.seed)
    results = []
    for c in range(query.num_candidates):
        if imp.variant == "dvae":
            eps = rng.standard_normal((1, imp.config.latent_dim))
            Xp = complete(imp, DC, MM, tn, eps=eps)
        elif imp.variant == "dwae" and query.num_candidates > 1:
            enc = imp_mod.encode(imp, DC, MM, tn)
            z = enc.z + imp.config.gen_noise * rng.standard_normal(enc.z.shape)
            Xhat = imp_mod.decode_and_clip(imp, z)
            Xp = imp_mod.merge(Xhat, DC, MM)
        else:
            Xp = complete(imp, DC, MM, tn)
        # fixed entries are echoed bit-exactly in raw units
        raw = dataio.denormalize(Xp[0], stats)
        design = dict(zip(DESIGN_VARS, raw.tolist()))
        for name, value in query.fixed.items():
            design[name] = float(value)
        pred_n = sur_mod.predict_strength(sur, Xp)[0]
        pred_mpa = float(dataio.denormalize_strength(pred_n, stats))
        results.append((design, pred_mpa))
    return results
