"""Run configuration: a flat, typed key-value YAML document with
`--set key=value` overrides. A verbatim snapshot is written into every run
directory so any run can be reproduced from its artifacts."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .errors import ConfigError


@dataclass
class RunConfig:
    dataset: str = "data/concrete.csv"
    out_dir: str = "runs"
    max_age: float = 28.0
    train_fraction: float = 0.8
    split_seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    variant: str = "dae"
    standalone: bool = False
    alpha: float = 0.5
    hidden: list = field(default_factory=lambda: [64, 64])
    latent_dim: int = 16
    beta: float = -1.0          # < 0 -> variant default
    bandwidth: float = -1.0     # < 0 -> sqrt(latent_dim)
    epochs: int = 500
    patience: int = 50
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    surrogate_mode: str = "frozen"
    max_masked_train: int = 5
    max_masked_levels: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    methods: list = field(default_factory=lambda: [
        "coop-dae", "coop-dvae", "coop-dwae",
        "standalone-dae", "standalone-dvae", "standalone-dwae", "bayes-gp"])
    budgets: list = field(default_factory=lambda: [1, 100, 1000, 10000, 100000])
    proposal_std: float = 0.15
    mask_seed_base: int = 9000
    val_fraction: float = 0.1

    def validate(self) -> "RunConfig":
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")
        if self.variant not in ("dae", "dvae", "dwae"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.surrogate_mode not in ("frozen", "joint"):
            raise ConfigError(f"unknown surrogate_mode {self.surrogate_mode!r}")
        if not 1 <= self.max_masked_train <= 5:
            raise ConfigError("max_masked_train must be in [1, 5]")
        if any(not 1 <= lvl <= 5 for lvl in self.max_masked_levels):
            raise ConfigError("max_masked_levels must be within [1, 5]")
        if self.epochs < 1 or self.batch_size < 1 or self.lr <= 0:
            raise ConfigError("epochs, batch_size and lr must be positive")
        if any(b < 1 for b in self.budgets):
            raise ConfigError("budgets must be >= 1")
        if self.proposal_std <= 0:
            raise ConfigError("proposal_std must be > 0")
        if not 0.0 <= self.val_fraction < 0.5:
            raise ConfigError("val_fraction must be in [0, 0.5)")
        return self


_FIELD_TYPES = {f.name: f for f in fields(RunConfig)}


def _coerce(name: str, value):
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    current = getattr(RunConfig(), name)
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(current, int):
        return int(value)
    if isinstance(current, float):
        return float(value)
    if isinstance(current, list):
        if isinstance(value, str):
            value = [v for v in value.split(",") if v != ""]
        elem = current[0] if current else None
        if isinstance(elem, int):
            return [int(v) for v in value]
        if isinstance(elem, float):
            return [float(v) for v in value]
        return [str(v) for v in value]
    return str(value)


def load_config(path=None, overrides=()) -> RunConfig:
    """Read a flat YAML config, apply key=value overrides, validate."""
    cfg = RunConfig()
    if path is not None:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
        if not isinstance(doc, dict):
            raise ConfigError("config file must be a flat key-value mapping")
        for key, value in doc.items():
            setattr(cfg, key, _coerce(key, value))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        setattr(cfg, key.strip(), _coerce(key.strip(), value.strip()))
    return cfg.validate()


def save_snapshot(cfg: RunConfig, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        yaml.safe_dump({f.name: getattr(cfg, f.name) for f in fields(RunConfig)},
                       fh, sort_keys=True)
