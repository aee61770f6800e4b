"""Cross-method evaluation harness: masked-variable sweeps over the five
seeded splits, shared frozen evaluator scoring, and the timing benchmark.

Within one (split, max_masked) cell every method receives bit-identical
evaluation masks, and every method's completions are scored by the same
frozen strength surrogate trained on that split.
"""

from __future__ import annotations

import csv
import time
import traceback
from dataclasses import dataclass, field

import numpy as np

from . import cooperative, dataio, gp_baseline, surrogate as sur_mod
from .dataio import Dataset, NormStats, SplitSpec
from .errors import ContractError
from .gp_baseline import GpModel, MhConfig
from .metrics import MetricsRecord, compute_metrics

COOP_METHODS = ("coop-dae", "coop-dvae", "coop-dwae")
STANDALONE_METHODS = ("standalone-dae", "standalone-dvae", "standalone-dwae")
ALL_METHODS = COOP_METHODS + STANDALONE_METHODS + ("bayes-gp",)

REPORT_COLUMNS = ("method", "seed", "max_masked", "budget", "r2",
                  "mae_norm", "mse_norm", "mae_mpa", "mse_mpa", "seconds")


@dataclass
class SweepConfig:
    seeds: tuple = (0, 1, 2, 3, 4)
    max_masked_levels: tuple = (1, 2, 3, 4, 5)
    methods: tuple = ALL_METHODS
    budgets: tuple = gp_baseline.DEFAULT_BUDGETS
    mask_seed_base: int = 9000
    alpha: float = 0.5
    epochs: int = 500
    patience: int = 50
    batch_size: int = 32
    lr: float = 1e-3
    latent_dim: int = 16
    hidden: tuple = (64, 64)
    max_masked_train: int = 5
    proposal_std: float = 0.15
    train_fraction: float = 0.8
    val_fraction: float = 0.1


@dataclass
class TrainedSplit:
    """Everything evaluation needs for one seeded split."""

    seed: int
    train: Dataset
    test: Dataset
    stats: NormStats
    evaluator: sur_mod.SurrogateModel   # shared frozen scorer
    imputers: dict = field(default_factory=dict)  # method -> ImputerModel
    gp: GpModel | None = None


def _coop_cfg(cfg: SweepConfig, variant: str, seed: int,
              standalone: bool) -> cooperative.CoopConfig:
    return cooperative.CoopConfig(
        alpha=cfg.alpha, variant=variant, epochs=cfg.epochs,
        patience=cfg.patience, batch_size=cfg.batch_size, seed=seed,
        max_masked_train=cfg.max_masked_train, lr=cfg.lr,
        latent_dim=cfg.latent_dim, hidden=cfg.hidden, standalone=standalone,
        val_fraction=cfg.val_fraction)


def prepare_split(ds: Dataset, seed: int, cfg: SweepConfig,
                  methods=None) -> TrainedSplit:
    """Split, fit normalization, train the shared evaluator and every model
    the requested methods need."""
    methods = tuple(methods if methods is not None else cfg.methods)
    train, test = dataio.split(ds, SplitSpec(seed=seed, train_fraction=cfg.train_fraction))
    stats = dataio.fit_normalizer(train)
    evaluator = sur_mod.train_surrogate(
        train, sur_mod.SurrogateConfig(hidden=cfg.hidden, epochs=cfg.epochs,
                                       patience=cfg.patience,
                                       batch_size=cfg.batch_size, lr=cfg.lr),
        seed=seed, stats=stats)
    out = TrainedSplit(seed=seed, train=train, test=test, stats=stats,
                       evaluator=evaluator)
    for method in methods:
        if method == "bayes-gp":
            out.gp = gp_baseline.fit_gp(train, stats)
        else:
            prefix, variant = method.split("-", 1)
            if prefix == "coop":
                imp, _, _ = cooperative.train_conn(
                    train, _coop_cfg(cfg, variant, seed, standalone=False),
                    sur=evaluator, stats=stats)
            else:
                imp, _ = cooperative.train_standalone(
                    train, _coop_cfg(cfg, variant, seed, standalone=True),
                    stats=stats)
            out.imputers[method] = imp
    return out


def complete_test_set(split: TrainedSplit, method: str, MM: np.ndarray,
                      budget: int | None = None,
                      proposal_std: float = 0.15) -> np.ndarray:
    """Completed normalized designs for the whole test set under one
    method, using the row's measured strength as the target."""
    Xn = dataio.normalize(split.test.design, split.stats, clip=True)
    yn = dataio.normalize_strength(split.test.strength, split.stats)
    DC = dataio.corrupt(Xn, MM)
    if method == "bayes-gp":
        if split.gp is None:
            raise ContractError("GP model not fitted for this split")
        if budget is None:
            raise ContractError("bayes-gp evaluation needs a budget")
        targets_std = (split.test.strength - split.gp.y_mean) / split.gp.y_std
        return gp_baseline.mh_infer_batch(
            split.gp, DC, MM, targets_std,
            MhConfig(budget=budget, proposal_std=proposal_std, seed=split.seed))
    imp = split.imputers[method]
    return cooperative.complete(imp, DC, MM, yn)


def evaluate_method(split: TrainedSplit, method: str, max_masked: int,
                    mask_seed: int, budget: int | None = None,
                    proposal_std: float = 0.15):
    """Score one method on one frozen-mask cell.

    Returns (metrics_normalized, metrics_mpa, seconds); the clock covers
    completion of the test set only.
    """
    MM = dataio.make_eval_masks(len(split.test), max_masked, mask_seed)
    t0 = time.perf_counter()
    Xp = complete_test_set(split, method, MM, budget=budget,
                           proposal_std=proposal_std)
    seconds = time.perf_counter() - t0
    scored_n = sur_mod.predict_strength(split.evaluator, Xp)
    yn = dataio.normalize_strength(split.test.strength, split.stats)
    rec_n = compute_metrics(yn, scored_n, units="normalized")
    span = split.stats.spans[dataio.N_DESIGN]
    rec_mpa = MetricsRecord(r2=rec_n.r2, mae=rec_n.mae * span,
                            mse=rec_n.mse * span * span, units="mpa",
                            m=rec_n.m)
    return rec_n, rec_mpa, seconds


def mask_seed_for(cfg: SweepConfig, split_seed: int, max_masked: int) -> int:
    # one seed per (split, level) cell, shared by every method
    return cfg.mask_seed_base + 1000 * split_seed + max_masked


def run_sweep(ds: Dataset, cfg: SweepConfig, progress=None):
    """Full cross product {methods} x {seeds} x {levels} (x budgets for the
    GP baseline). Returns (rows, failures); each row is a dict with
    REPORT_COLUMNS keys. Per-cell failures are recorded and the sweep
    continues.
    """
    rows, failures = [], []
    for seed in cfg.seeds:
        try:
            split = prepare_split(ds, seed, cfg)
        except Exception as exc:  # a broken split fails all its cells
            failures.append({"seed": seed, "error": repr(exc),
                             "trace": traceback.format_exc()})
            continue
        for method in cfg.methods:
            budgets = cfg.budgets if method == "bayes-gp" else (None,)
            for level in cfg.max_masked_levels:
                for budget in budgets:
                    try:
                        rec_n, rec_mpa, secs = evaluate_method(
                            split, method, level,
                            mask_seed_for(cfg, seed, level),
                            budget=budget, proposal_std=cfg.proposal_std)
                        row = {
                            "method": method, "seed": seed,
                            "max_masked": level,
                            "budget": budget if budget is not None else "",
                            "r2": rec_n.r2, "mae_norm": rec_n.mae,
                            "mse_norm": rec_n.mse, "mae_mpa": rec_mpa.mae,
                            "mse_mpa": rec_mpa.mse, "seconds": secs,
                        }
                        rows.append(row)
                        if progress:
                            progress(row)
                    except Exception as exc:
                        failures.append({
                            "seed": seed, "method": method,
                            "max_masked": level, "budget": budget,
                            "error": repr(exc),
                            "trace": traceback.format_exc()})
    return rows, failures


def aggregate(rows):
    """Mean and std over seeds per (method, max_masked, budget) cell."""
    groups = {}
    for row in rows:
        key = (row["method"], row["max_masked"], row["budget"])
        groups.setdefault(key, []).append(row)
    out = []
    for (method, level, budget), cell in sorted(groups.items(), key=str):
        rec = {"method": method, "max_masked": level, "budget": budget,
               "n_seeds": len(cell)}
        for col in ("r2", "mae_norm", "mse_norm", "mae_mpa", "mse_mpa", "seconds"):
            vals = np.array([r[col] for r in cell], dtype=np.float64)
            rec[f"{col}_mean"] = float(vals.mean())
            rec[f"{col}_std"] = float(vals.std())
        out.append(rec)
    return out


def write_report_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in REPORT_COLUMNS})


def write_summary_csv(agg, path) -> None:
    if not agg:
        with open(path, "w", newline="") as fh:
            fh.write("")
        return
    cols = list(agg[0].keys())
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        writer.writerows(agg)


def summary_table(agg) -> str:
    """Aligned text table of the aggregate. All methods are scored by the
    shared per-split evaluator surrogate."""
    header = (f"{'method':<18}{'masked':>7}{'budget':>9}"
              f"{'R2':>9}{'MAE(n)':>9}{'MSE(n)':>9}{'sec':>9}")
    lines = ["# scoring: shared frozen evaluator surrogate per split", header,
             "-" * len(header)]
    for rec in agg:
        budget = rec["budget"] if rec["budget"] not in ("", None) else "-"
        lines.append(
            f"{rec['method']:<18}{rec['max_masked']:>7}{str(budget):>9}"
            f"{rec['r2_mean']:>9.3f}{rec['mae_norm_mean']:>9.3f}"
            f"{rec['mse_norm_mean']:>9.3f}{rec['seconds_mean']:>9.3f}")
    return "\n".join(lines)


def time_comparison(split: TrainedSplit, cfg: SweepConfig,
                    max_masked: int = 5, budgets=None):
    """Wall-clock for completing the full test set: one-pass coop-dae vs the
    GP baseline at each budget, with speedup ratios."""
    budgets = tuple(budgets if budgets is not None else cfg.budgets)
    mask_seed = mask_seed_for(cfg, split.seed, max_masked)
    _, _, base_secs = evaluate_method(split, "coop-dae", max_masked, mask_seed)
    out = {"coop-dae_seconds": base_secs, "budgets": []}
    for budget in budgets:
        _, _, secs = evaluate_method(split, "bayes-gp", max_masked, mask_seed,
                                     budget=budget,
                                     proposal_std=cfg.proposal_std)
        out["budgets"].append({"budget": budget, "seconds": secs,
                               "speedup": secs / base_secs if base_secs > 0 else float("inf")})
    return out
