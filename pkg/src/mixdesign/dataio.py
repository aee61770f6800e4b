"""Dataset ingestion, age filtering, seeded splits, normalization and masks.

All arrays are float64. A dataset row holds the 8 design variables plus the
measured compressive strength, in the fixed column order below.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, ParseError, SchemaError, ValidationError

DESIGN_VARS = ("cement", "bfs", "pfa", "water", "sp", "ca", "fa", "age")
TARGET = "strength"
COLUMNS = DESIGN_VARS + (TARGET,)
N_DESIGN = len(DESIGN_VARS)
AGE_INDEX = DESIGN_VARS.index("age")

UNITS = {
    "cement": "kg/m3", "bfs": "kg/m3", "pfa": "kg/m3", "water": "kg/m3",
    "sp": "kg/m3", "ca": "kg/m3", "fa": "kg/m3", "age": "days",
    "strength": "MPa",
}


@dataclass(frozen=True)
class Dataset:
    """Immutable table of mix designs; `values` has one row per specimen."""

    values: np.ndarray  # (n, 9), columns in COLUMNS order
    provenance: str = "unknown"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != len(COLUMNS):
            raise ContractError(f"dataset must be (n, {len(COLUMNS)}), got {v.shape}")
        # An empty table is allowed (age filters may pass nothing); training
        # entry points reject it instead.
        _validate_rows(v)
        object.__setattr__(self, "values", v)
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def design(self) -> np.ndarray:
        """(n, 8) view of the design variables."""
        return self.values[:, :N_DESIGN]

    @property
    def strength(self) -> np.ndarray:
        """(n,) measured compressive strengths in MPa."""
        return self.values[:, N_DESIGN]


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    train_fraction: float = 0.8


@dataclass(frozen=True)
class NormStats:
    """Per-column training min/max for all nine columns."""

    mins: np.ndarray  # (9,)
    maxs: np.ndarray  # (9,)

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64)
        maxs = np.asarray(self.maxs, dtype=np.float64)
        if mins.shape != (len(COLUMNS),) or maxs.shape != (len(COLUMNS),):
            raise ContractError("NormStats must cover all nine columns")
        if np.any(mins > maxs):
            raise ValidationError("per-column min exceeds max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        self.mins.setflags(write=False)
        self.maxs.setflags(write=False)

    @property
    def spans(self) -> np.ndarray:
        return self.maxs - self.mins


def _validate_rows(v: np.ndarray) -> None:
    if not np.all(np.isfinite(v)):
        i = int(np.argwhere(~np.isfinite(v))[0, 0])
        raise ValidationError(f"non-finite value in row {i}")
    if np.any(v < 0):
        i, j = np.argwhere(v < 0)[0]
        raise ValidationError(f"negative value in row {int(i)}, column {COLUMNS[int(j)]}")
    if np.any(v[:, AGE_INDEX] < 1):
        i = int(np.argwhere(v[:, AGE_INDEX] < 1)[0, 0])
        raise ValidationError(f"age < 1 day in row {i}")


def load_dataset(path) -> Dataset:
    """Read a mix-design CSV with the canonical nine-column header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file") from None
        header = [h.strip() for h in header]
        if header != list(COLUMNS):
            expected, got = set(COLUMNS), set(header)
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            detail = []
            if missing:
                detail.append(f"missing column(s): {', '.join(missing)}")
            if extra:
                detail.append(f"unexpected column(s): {', '.join(extra)}")
            if not detail:
                detail.append(f"column order must be {','.join(COLUMNS)}")
            raise SchemaError("; ".join(detail))
        rows = []
        for i, rec in enumerate(reader):
            if not rec or (len(rec) == 1 and not rec[0].strip()):
                continue
            if len(rec) != len(COLUMNS):
                raise SchemaError(f"row {i}: expected {len(COLUMNS)} cells, got {len(rec)}")
            try:
                rows.append([float(c) for c in rec])
            except ValueError:
                bad = next(c for c in rec if not _is_float(c))
                raise ParseError(f"row {i}: non-numeric cell {bad!r}") from None
    if not rows:
        raise ValidationError("file contains a header but no data rows")
    return Dataset(np.array(rows, dtype=np.float64), provenance=str(path))


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def filter_by_age(ds: Dataset, max_age: float) -> Dataset:
    """Keep rows with age <= max_age, preserving order. Empty result is valid."""
    if max_age < 1:
        raise ConfigError("max_age must be >= 1")
    keep = ds.values[:, AGE_INDEX] <= max_age
    return Dataset(ds.values[keep], provenance=ds.provenance)


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint seeded train/test partition; |train| = ceil(fraction * n)."""
    if not 0.0 < spec.train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {spec.train_fraction}")
    n = len(ds)
    if n < 2:
        raise ContractError("need at least 2 rows to split")
    # ceil keeps the reference protocol's 600/149 partition of 749 rows
    n_train = int(np.ceil(spec.train_fraction * n - 1e-9))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(spec.seed).permutation(n)
    tr, te = np.sort(perm[:n_train]), np.sort(perm[n_train:])
    return (
        Dataset(ds.values[tr], provenance=ds.provenance),
        Dataset(ds.values[te], provenance=ds.provenance),
    )


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Index form of `split`, for writing split manifests."""
    if not 0.0 < spec.train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {spec.train_fraction}")
    n_train = int(np.ceil(spec.train_fraction * n - 1e-9))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(spec.seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def fit_normalizer(train: Dataset) -> NormStats:
    """Per-column min/max over the training rows (all nine columns)."""
    return NormStats(train.values.min(axis=0), train.values.max(axis=0))


def normalize(x: np.ndarray, stats: NormStats, clip: bool = False) -> np.ndarray:
    """Map raw values to [0, 1] per column; constant columns map to 0.

    `x` may be (9,), (n, 9), (8,) or (n, 8); design-variable stats are used
    for 8-wide input. `clip=True` clamps out-of-range values (inference
    paths only).
    """
    x = np.asarray(x, dtype=np.float64)
    ncol = x.shape[-1]
    if ncol == len(COLUMNS):
        mins, spans = stats.mins, stats.spans
    elif ncol == N_DESIGN:
        mins, spans = stats.mins[:N_DESIGN], stats.spans[:N_DESIGN]
    else:
        raise ContractError(f"expected 8 or 9 columns, got {ncol}")
    safe = np.where(spans > 0, spans, 1.0)
    out = (x - mins) / safe
    out = np.where(spans > 0, out, 0.0)
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out


def denormalize(v: np.ndarray, stats: NormStats) -> np.ndarray:
    """Inverse of `normalize`; constant columns return the constant."""
    v = np.asarray(v, dtype=np.float64)
    ncol = v.shape[-1]
    if ncol == len(COLUMNS):
        mins, spans = stats.mins, stats.spans
    elif ncol == N_DESIGN:
        mins, spans = stats.mins[:N_DESIGN], stats.spans[:N_DESIGN]
    else:
        raise ContractError(f"expected 8 or 9 columns, got {ncol}")
    return mins + v * spans


def normalize_strength(s, stats: NormStats):
    mn, span = stats.mins[N_DESIGN], stats.spans[N_DESIGN]
    s = np.asarray(s, dtype=np.float64)
    return (s - mn) / span if span > 0 else np.zeros_like(s)


def denormalize_strength(s, stats: NormStats):
    mn, span = stats.mins[N_DESIGN], stats.spans[N_DESIGN]
    return mn + np.asarray(s, dtype=np.float64) * span


def make_eval_masks(n_samples: int, max_masked: int, seed: int) -> np.ndarray:
    """Frozen evaluation masks: per row, k ~ Uniform{1..max_masked} design
    variables are hidden (0); the rest stay observed (1).
    """
    if not 1 <= max_masked <= 5:
        raise ConfigError(f"max_masked must be in [1, 5], got {max_masked}")
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    mask = np.ones((n_samples, N_DESIGN), dtype=np.float64)
    ks = rng.integers(1, max_masked + 1, size=n_samples)
    for i, k in enumerate(ks):
        mask[i, rng.choice(N_DESIGN, size=int(k), replace=False)] = 0.0
    return mask


def sample_training_masks(n_samples: int, max_masked: int, rng: np.random.Generator) -> np.ndarray:
    """Same distribution as `make_eval_masks` but driven by a live rng, so
    training can resample fresh corruption each epoch."""
    if not 1 <= max_masked <= 5:
        raise ConfigError(f"max_masked must be in [1, 5], got {max_masked}")
    mask = np.ones((n_samples, N_DESIGN), dtype=np.float64)
    ks = rng.integers(1, max_masked + 1, size=n_samples)
    for i, k in enumerate(ks):
        mask[i, rng.choice(N_DESIGN, size=int(k), replace=False)] = 0.0
    return mask


def corrupt(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero out masked design entries. `x` may be (n, 8) or (n, 9); a ninth
    (strength) column passes through untouched."""
    x = np.asarray(x, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if x.ndim != 2 or mask.ndim != 2 or x.shape[0] != mask.shape[0] or mask.shape[1] != N_DESIGN:
        raise ContractError(f"shape mismatch: x {x.shape}, mask {mask.shape}")
    if x.shape[1] == N_DESIGN:
        return x * mask
    if x.shape[1] == len(COLUMNS):
        out = x.copy()
        out[:, :N_DESIGN] *= mask
        return out
    raise ContractError(f"expected 8 or 9 columns, got {x.shape[1]}")
