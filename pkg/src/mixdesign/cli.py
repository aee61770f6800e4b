"""Command-line entry point wiring the pipeline into reproducible workflows.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
error, 5 sweep finished with per-cell failures.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from . import (checkpoint, config as config_mod, cooperative, dataio,
               evaluation, gp_baseline, surrogate as sur_mod)
from .dataio import COLUMNS, DESIGN_VARS, SplitSpec
from .errors import (ConfigError, ContractError, MixDesignError, NumericError,
                     ParseError, QueryError, SchemaError, TrainingError,
                     ValidationError)

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_PARTIAL = 5


def _fail(exc: Exception) -> int:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, (ConfigError, QueryError)):
        return EXIT_CONFIG
    if isinstance(exc, (SchemaError, ParseError, ValidationError, ContractError)):
        return EXIT_DATA
    if isinstance(exc, (NumericError, TrainingError)):
        return EXIT_NUMERIC
    return 1


@click.group()
def main():
    """Partial inverse design of concrete mixes."""


def _load_cfg(config_path, overrides):
    return config_mod.load_config(config_path, overrides)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default="ingest_out",
              help="Directory for the filtered CSV and column summary.")
@click.option("--max-age", type=float, default=28.0, show_default=True)
def ingest(path, out, max_age):
    """Load a dataset CSV, filter by curing age, write summary artifacts."""
    try:
        ds = dataio.load_dataset(path)
        filtered = dataio.filter_by_age(ds, max_age)
    except MixDesignError as exc:
        sys.exit(_fail(exc))
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "filtered.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in filtered.values:
            writer.writerow([f"{v:g}" for v in row])
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["column", "unit", "min", "max", "mean"])
        for j, col in enumerate(COLUMNS):
            vals = filtered.values[:, j]
            writer.writerow([col, dataio.UNITS[col], f"{vals.min():g}",
                             f"{vals.max():g}", f"{vals.mean():g}"])
    click.echo(f"loaded {len(ds)} rows, {len(filtered)} after age <= {max_age:g} filter")
    click.echo(f"wrote {out / 'filtered.csv'} and {out / 'summary.csv'}")


def _coop_config(cfg: config_mod.RunConfig, seed: int) -> cooperative.CoopConfig:
    return cooperative.CoopConfig(
        alpha=cfg.alpha, variant=cfg.variant, epochs=cfg.epochs,
        patience=cfg.patience, batch_size=cfg.batch_size, seed=seed,
        surrogate_mode=cfg.surrogate_mode,
        max_masked_train=cfg.max_masked_train, lr=cfg.lr,
        latent_dim=cfg.latent_dim, hidden=tuple(cfg.hidden),
        beta=None if cfg.beta < 0 else cfg.beta,
        bandwidth=None if cfg.bandwidth < 0 else cfg.bandwidth,
        standalone=cfg.standalone, val_fraction=cfg.val_fraction)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--set", "overrides", multiple=True, help="Override key=value.")
@click.option("--run-name", default=None)
def train(config_path, overrides, run_name):
    """Pretrain the surrogate and train the (cooperative or standalone)
    imputer; write checkpoints, loss log and config snapshot."""
    try:
        cfg = _load_cfg(config_path, overrides)
        ds = dataio.filter_by_age(dataio.load_dataset(cfg.dataset), cfg.max_age)
        seed = cfg.seed
        train_ds, _ = dataio.split(
            ds, SplitSpec(seed=seed, train_fraction=cfg.train_fraction))
        ccfg = _coop_config(cfg, seed)
        if cfg.standalone:
            stats = dataio.fit_normalizer(train_ds)
            imp, log = cooperative.train_standalone(train_ds, ccfg, stats=stats)
            sur = sur_mod.train_surrogate(
                train_ds,
                sur_mod.SurrogateConfig(hidden=tuple(cfg.hidden), epochs=cfg.epochs,
                                        patience=cfg.patience,
                                        batch_size=cfg.batch_size, lr=cfg.lr),
                seed=seed, stats=stats)
        else:
            imp, sur, log = cooperative.train_conn(
                train_ds, ccfg,
                sur_cfg=sur_mod.SurrogateConfig(
                    hidden=tuple(cfg.hidden), epochs=cfg.epochs,
                    patience=cfg.patience, batch_size=cfg.batch_size,
                    lr=cfg.lr))
    except MixDesignError as exc:
        sys.exit(_fail(exc))
    name = run_name or f"{'standalone' if cfg.standalone else 'coop'}-{cfg.variant}-seed{seed}"
    run_dir = Path(cfg.out_dir) / name
    run_dir.mkdir(parents=True, exist_ok=True)
    checkpoint.save_pair(imp, sur, run_dir)
    config_mod.save_snapshot(cfg, run_dir / "config.yaml")
    with open(run_dir / "losses.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "l1", "l2", "total", "val"])
        writer.writerows(log.epochs)
    click.echo(f"run written to {run_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--set", "overrides", multiple=True)
@click.option("--out", type=click.Path(), default="sweep_out")
def sweep(config_path, overrides, out):
    """Run the cross-method masked-variable sweep and write report files."""
    try:
        cfg = _load_cfg(config_path, overrides)
        ds = dataio.filter_by_age(dataio.load_dataset(cfg.dataset), cfg.max_age)
    except MixDesignError as exc:
        sys.exit(_fail(exc))
    scfg = evaluation.SweepConfig(
        seeds=tuple(cfg.split_seeds),
        max_masked_levels=tuple(cfg.max_masked_levels),
        methods=tuple(cfg.methods), budgets=tuple(cfg.budgets),
        mask_seed_base=cfg.mask_seed_base, alpha=cfg.alpha,
        epochs=cfg.epochs, patience=cfg.patience, batch_size=cfg.batch_size,
        lr=cfg.lr, latent_dim=cfg.latent_dim, hidden=tuple(cfg.hidden),
        max_masked_train=cfg.max_masked_train, proposal_std=cfg.proposal_std,
        train_fraction=cfg.train_fraction, val_fraction=cfg.val_fraction)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rows, failures = evaluation.run_sweep(
        ds, scfg, progress=lambda r: click.echo(
            f"  {r['method']} seed={r['seed']} masked={r['max_masked']} "
            f"budget={r['budget'] or '-'} r2={r['r2']:.3f}"))
    evaluation.write_report_csv(rows, out / "report.csv")
    agg = evaluation.aggregate(rows)
    evaluation.write_summary_csv(agg, out / "summary.csv")
    table = evaluation.summary_table(agg)
    (out / "summary.txt").write_text(table + "\n")
    config_mod.save_snapshot(cfg, out / "config.yaml")
    click.echo(table)
    if failures:
        (out / "failures.json").write_text(json.dumps(failures, indent=2))
        click.echo(f"{len(failures)} cell(s) failed; see {out / 'failures.json'}",
                   err=True)
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.argument("model_dir", type=click.Path(exists=True))
@click.option("--fix", "fixes", multiple=True, help="name=value, repeatable.")
@click.option("--target", type=float, required=True, help="Target strength (MPa).")
@click.option("--candidates", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def infer(model_dir, fixes, target, candidates, seed):
    """Complete a partial design with a trained model; CSV on stdout."""
    try:
        imp, sur = checkpoint.load_pair(model_dir)
        fixed = {}
        for item in fixes:
            if "=" not in item:
                raise QueryError(f"--fix expects name=value, got {item!r}")
            name, value = item.split("=", 1)
            try:
                fixed[name.strip()] = float(value)
            except ValueError:
                raise QueryError(f"--fix value for {name!r} is not numeric") from None
        query = cooperative.InverseQuery(fixed=fixed, target_strength=target,
                                         num_candidates=candidates, seed=seed)
        results = cooperative.infer_partial(imp, sur, imp.stats, query)
    except MixDesignError as exc:
        sys.exit(_fail(exc))
    writer = csv.writer(sys.stdout)
    writer.writerow(list(DESIGN_VARS) + ["predicted_strength_mpa", "deviation_mpa"])
    for design, pred in results:
        writer.writerow([f"{design[v]:.2f}" for v in DESIGN_VARS]
                        + [f"{pred:.2f}", f"{pred - target:+.2f}"])


@main.command("baseline-gp")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--set", "overrides", multiple=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", type=int, default=1000, show_default=True)
@click.option("--max-masked", type=int, default=5, show_default=True)
@click.option("--out", type=click.Path(), default="-",
              help="Output CSV path, '-' for stdout.")
def baseline_gp(config_path, overrides, seed, budget, max_masked, out):
    """GP + random-walk sampling baseline over one split's test set."""
    import time as _time
    try:
        cfg = _load_cfg(config_path, overrides)
        ds = dataio.filter_by_age(dataio.load_dataset(cfg.dataset), cfg.max_age)
        train_ds, test_ds = dataio.split(
            ds, SplitSpec(seed=seed, train_fraction=cfg.train_fraction))
        stats = dataio.fit_normalizer(train_ds)
        gp = gp_baseline.fit_gp(train_ds, stats)
        MM = dataio.make_eval_masks(
            len(test_ds), max_masked, cfg.mask_seed_base + 1000 * seed + max_masked)
        Xn = dataio.normalize(test_ds.design, stats, clip=True)
        DC = dataio.corrupt(Xn, MM)
        targets_std = (test_ds.strength - gp.y_mean) / gp.y_std
        t0 = _time.perf_counter()
        Xp = gp_baseline.mh_infer_batch(
            gp, DC, MM, targets_std,
            gp_baseline.MhConfig(budget=budget, proposal_std=cfg.proposal_std,
                                 seed=seed))
        seconds = _time.perf_counter() - t0
    except MixDesignError as exc:
        sys.exit(_fail(exc))
    raw = dataio.denormalize(Xp, stats)
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.writer(fh)
        writer.writerow(["row"] + list(DESIGN_VARS) + ["seconds_total"])
        for i, row in enumerate(raw):
            writer.writerow([i] + [f"{v:.2f}" for v in row]
                            + ([f"{seconds:.3f}"] if i == 0 else [""]))
    finally:
        if fh is not sys.stdout:
            fh.close()
    click.echo(f"budget={budget} completed {len(raw)} rows in {seconds:.2f}s",
               err=True)


@main.command()
@click.option("--models", "model_dir", type=click.Path(exists=True), required=True,
              help="Directory whose subdirectories hold model checkpoints.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--cors-origin", default=None,
              help="Allowed studio origin; omit to disable CORS.")
def serve(model_dir, host, port, cors_origin):
    """Serve trained models over HTTP for the design studio."""
    import uvicorn

    from .service import create_app
    app = create_app(model_dir, cors_origin=cors_origin)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("report_csv", type=click.Path(exists=True))
def report(report_csv):
    """Re-aggregate a sweep report CSV and print the summary table."""
    rows = []
    with open(report_csv, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "method": rec["method"], "seed": int(rec["seed"]),
                "max_masked": int(rec["max_masked"]),
                "budget": rec["budget"] or "",
                "r2": float(rec["r2"]), "mae_norm": float(rec["mae_norm"]),
                "mse_norm": float(rec["mse_norm"]),
                "mae_mpa": float(rec["mae_mpa"]),
                "mse_mpa": float(rec["mse_mpa"]),
                "seconds": float(rec["seconds"]),
            })
    click.echo(evaluation.summary_table(evaluation.aggregate(rows)))


if __name__ == "__main__":
    main()
