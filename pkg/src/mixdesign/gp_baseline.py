"""Gaussian-process surrogate with random-walk Metropolis-Hastings inference
over the unknown design variables.

Inputs are normalized to [0, 1]; targets are standardized. The kernel is an
isotropic RBF whose hyperparameters come from a deterministic grid search
maximizing the log marginal likelihood.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from . import dataio
from .dataio import Dataset, N_DESIGN, NormStats
from .errors import ConfigError, ContractError, NumericError, QueryError, ValidationError

DEFAULT_BUDGETS = (1, 100, 1000, 10000, 100000)


@dataclass
class GpModel:
    X: np.ndarray          # (n, 8) normalized training inputs
    y: np.ndarray          # (n,) standardized targets
    y_mean: float
    y_std: float
    signal_var: float
    lengthscale: float
    noise_var: float
    chol: np.ndarray       # lower Cholesky of K + noise I (+ jitter)
    alpha: np.ndarray      # (K + noise I)^-1 y
    stats: NormStats
    log_marginal: float = float("nan")
    jitter: float = 0.0


@dataclass
class MhConfig:
    budget: int = 100000
    proposal_std: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.proposal_std <= 0:
            raise ConfigError("proposal_std must be > 0")

    @property
    def burn_in(self) -> int:
        return min(200, self.budget // 2)


@dataclass
class PosteriorSamples:
    chain: np.ndarray           # (kept, n_unknown)
    unknown_idx: np.ndarray     # columns the chain covers
    acceptance_rate: float


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d2, 0.0)


def _kernel(a, b, signal_var, lengthscale):
    return signal_var * np.exp(-_sqdist(a, b) / (2.0 * lengthscale ** 2))


def _chol_with_jitter(K: np.ndarray, noise_var: float):
    n = K.shape[0]
    jitter = 1e-8
    while jitter <= 1e-4:
        try:
            L = np.linalg.cholesky(K + (noise_var + jitter) * np.eye(n))
            return L, jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NumericError("kernel matrix is not positive definite even with jitter 1e-4")


def log_marginal_likelihood(X, y, signal_var, lengthscale, noise_var) -> float:
    K = _kernel(X, X, signal_var, lengthscale)
    L, _ = _chol_with_jitter(K, noise_var)
    alpha = cho_solve((L, True), y)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(L)))
                 - 0.5 * len(y) * np.log(2.0 * np.pi))


def fit_gp(train: Dataset, stats: NormStats | None = None,
           signal_grid=None, length_grid=None, noise_grid=None) -> GpModel:
    """Deterministic grid search over (signal var, lengthscale, noise var)
    maximizing the log marginal likelihood, then a Cholesky fit."""
    if len(train) == 0:
        raise ValidationError("empty training set")
    if stats is None:
        stats = dataio.fit_normalizer(train)
    X = dataio.normalize(train.design, stats)
    y_raw = train.strength
    y_mean = float(np.mean(y_raw))
    y_std = float(np.std(y_raw))
    if y_std == 0.0:
        y_std = 1.0
    y = (y_raw - y_mean) / y_std

    signal_grid = np.logspace(-1, 1, 3) if signal_grid is None else np.asarray(signal_grid)
    length_grid = np.logspace(-1.5, 0.5, 7) if length_grid is None else np.asarray(length_grid)
    noise_grid = np.logspace(-4, -1, 4) if noise_grid is None else np.asarray(noise_grid)

    best = None
    for sv in signal_grid:
        for ls in length_grid:
            for nv in noise_grid:
                lml = log_marginal_likelihood(X, y, sv, ls, nv)
                if best is None or lml > best[0]:
                    best = (lml, float(sv), float(ls), float(nv))
    lml, sv, ls, nv = best
    K = _kernel(X, X, sv, ls)
    L, jitter = _chol_with_jitter(K, nv)
    alpha = cho_solve((L, True), y)
    return GpModel(X=X, y=y, y_mean=y_mean, y_std=y_std, signal_var=sv,
                   lengthscale=ls, noise_var=nv, chol=L, alpha=alpha,
                   stats=stats, log_marginal=lml, jitter=jitter)


def gp_predict(g: GpModel, Xq: np.ndarray):
    """Posterior mean and variance (standardized units) per query row; the
    variance includes the noise term."""
    Xq = np.atleast_2d(np.asarray(Xq, dtype=np.float64))
    if Xq.shape[1] != N_DESIGN:
        raise ContractError(f"expected {N_DESIGN} columns, got {Xq.shape[1]}")
    k_star = _kernel(Xq, g.X, g.signal_var, g.lengthscale)  # (b, n)
    mean = k_star @ g.alpha
    v = solve_triangular(g.chol, k_star.T, lower=True)
    var = g.signal_var - np.sum(v * v, axis=0) + g.noise_var
    return mean, np.maximum(var, 1e-12)


def mh_infer(g: GpModel, fixed: np.ndarray, mask: np.ndarray,
             target_std: float, cfg: MhConfig) -> PosteriorSamples:
    """Random-walk MH over the unknown coordinates of one query.

    `fixed` is a normalized (8,) vector with fixed values filled in; `mask`
    has 1 at fixed positions, 0 at unknowns. The chain starts at the
    coordinate-wise training mean, lives on [0, 1] (uniform prior), and
    discards min(200, budget // 2) burn-in samples.
    """
    fixed = np.asarray(fixed, dtype=np.float64).reshape(-1)
    mask = np.asarray(mask, dtype=np.float64).reshape(-1)
    if fixed.shape != (N_DESIGN,) or mask.shape != (N_DESIGN,):
        raise ContractError("fixed and mask must be length-8 vectors")
    unknown = np.where(mask == 0)[0]
    if unknown.size == 0:
        raise QueryError("all variables fixed; nothing to sample")

    history, _, n_acc, n_prop = _run_chains(
        g, fixed[None, :], mask[None, :], np.array([target_std]), cfg)
    rate = n_acc / n_prop if n_prop else 0.0
    return PosteriorSamples(chain=history[:, 0, :][:, unknown],
                            unknown_idx=unknown, acceptance_rate=float(rate))


def _kinv(g: GpModel) -> np.ndarray:
    # cached dense inverse for the sampler's inner loop; gp_predict keeps
    # the Cholesky path
    if not hasattr(g, "_kinv_cache"):
        n = g.X.shape[0]
        g._kinv_cache = cho_solve((g.chol, True), np.eye(n))
    return g._kinv_cache


def _log_like(g: GpModel, X: np.ndarray, target_std: np.ndarray,
              kinv: np.ndarray | None = None) -> np.ndarray:
    if kinv is None:
        mean, var = gp_predict(g, X)
    else:
        k_star = _kernel(X, g.X, g.signal_var, g.lengthscale)
        mean = k_star @ g.alpha
        var = g.signal_var - np.einsum("bn,bn->b", k_star @ kinv, k_star) + g.noise_var
        var = np.maximum(var, 1e-12)
    return -0.5 * np.log(2.0 * np.pi * var) - 0.5 * (target_std - mean) ** 2 / var


def _run_chains(g: GpModel, fixed: np.ndarray, mask: np.ndarray,
                targets_std: np.ndarray, cfg: MhConfig,
                keep_history: bool = True):
    """Vectorized MH: one independent chain per row.

    With keep_history the full (budget - burn_in, rows, 8) state history is
    returned; otherwise only the running post burn-in mean (rows, 8), which
    keeps 100k-step budgets in constant memory.
    """
    rng = np.random.default_rng(cfg.seed)
    rows = fixed.shape[0]
    free = mask == 0
    init_mean = g.X.mean(axis=0)
    state = np.where(free, init_mean, fixed)
    state = np.clip(state, 0.0, 1.0)
    kinv = _kinv(g)
    loglike = _log_like(g, state, targets_std, kinv)
    burn = cfg.burn_in
    if keep_history:
        history = np.empty((cfg.budget - burn, rows, N_DESIGN))
    acc_sum = np.zeros((rows, N_DESIGN))
    kept = 0
    if burn == 0:
        if keep_history:
            history[0] = state
        acc_sum += state
        kept = 1
    n_acc = 0
    n_prop = 0
    for t in range(1, cfg.budget):
        step = rng.normal(0.0, cfg.proposal_std, size=state.shape) * free
        prop = state + step
        in_support = np.all((prop >= 0.0) & (prop <= 1.0), axis=1)
        prop_eval = np.where(in_support[:, None], prop, state)
        ll_prop = _log_like(g, prop_eval, targets_std, kinv)
        log_u = np.log(rng.uniform(size=rows))
        accept = in_support & (log_u < ll_prop - loglike)
        state = np.where(accept[:, None], prop, state)
        loglike = np.where(accept, ll_prop, loglike)
        if t >= burn:
            if keep_history:
                history[kept] = state
            acc_sum += state
            kept += 1
        n_acc += int(accept.sum())
        n_prop += rows
    mean = acc_sum / max(kept, 1)
    if keep_history:
        return history, mean, n_acc, n_prop
    return None, mean, n_acc, n_prop


def mh_infer_batch(g: GpModel, DC: np.ndarray, MM: np.ndarray,
                   targets_std: np.ndarray, cfg: MhConfig) -> np.ndarray:
    """Posterior-mean completion for a whole corrupted test batch at once.

    Rows run as independent chains sharing the step loop. Returns the
    completed normalized (rows, 8) designs.
    """
    DC = np.atleast_2d(np.asarray(DC, dtype=np.float64))
    MM = np.atleast_2d(np.asarray(MM, dtype=np.float64))
    targets_std = np.asarray(targets_std, dtype=np.float64).reshape(-1)
    if DC.shape != MM.shape or DC.shape[1] != N_DESIGN or len(targets_std) != DC.shape[0]:
        raise ContractError("shape mismatch in mh_infer_batch")
    _, post_mean, _, _ = _run_chains(g, DC, MM, targets_std, cfg,
                                     keep_history=False)
    return np.where(MM == 1.0, DC, post_mean)


def posterior_mean_design(s: PosteriorSamples, fixed: np.ndarray,
                          mask: np.ndarray) -> np.ndarray:
    """Coordinate-wise post burn-in mean for unknowns; fixed values echoed."""
    if s.chain.shape[0] == 0:
        raise ContractError("empty chain")
    out = np.asarray(fixed, dtype=np.float64).copy()
    out[s.unknown_idx] = s.chain.mean(axis=0)
    return out


def standardize_target(g: GpModel, target_mpa: float) -> float:
    return (target_mpa - g.y_mean) / g.y_std
