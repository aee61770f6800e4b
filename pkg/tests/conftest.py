"""Shared fixtures: the bundled dataset, seeded splits and small trained
models that several test modules reuse."""

from pathlib import Path

import numpy as np
import pytest

from mixdesign import cooperative, dataio, surrogate as sur_mod

REPO = Path(__file__).resolve().parent.parent
DATA_CSV = REPO / "data" / "concrete.csv"


@pytest.fixture(scope="session")
def dataset() -> dataio.Dataset:
    return dataio.load_dataset(DATA_CSV)


@pytest.fixture(scope="session")
def filtered(dataset) -> dataio.Dataset:
    return dataio.filter_by_age(dataset, 28.0)


@pytest.fixture(scope="session")
def split0(filtered):
    return dataio.split(filtered, dataio.SplitSpec(seed=0))


def make_toy_dataset(n: int = 40, seed: int = 7) -> dataio.Dataset:
    """Small synthetic table with the real schema, for fast training tests."""
    rng = np.random.default_rng(seed)
    cement = rng.uniform(150, 450, n)
    bfs = rng.uniform(0, 300, n)
    pfa = rng.uniform(0, 180, n)
    water = rng.uniform(130, 240, n)
    sp = rng.uniform(0, 30, n)
    ca = rng.uniform(820, 1100, n)
    fa = rng.uniform(620, 950, n)
    age = rng.integers(1, 29, n).astype(float)
    strength = (20 + 60 * cement / (water + 1) / 3
                + 0.1 * sp + 2 * np.log1p(age) + rng.normal(0, 1.0, n))
    vals = np.column_stack([cement, bfs, pfa, water, sp, ca, fa, age, strength])
    return dataio.Dataset(vals, provenance="toy")


@pytest.fixture(scope="session")
def toy_ds():
    return make_toy_dataset()


@pytest.fixture(scope="session")
def toy_surrogate(toy_ds):
    cfg = sur_mod.SurrogateConfig(hidden=(16, 16), epochs=200, patience=200)
    return sur_mod.train_surrogate(toy_ds, cfg, seed=0)


@pytest.fixture(scope="session")
def toy_pair(toy_ds, toy_surrogate):
    """A small cooperative (imputer, surrogate) pair trained in seconds."""
    cfg = cooperative.CoopConfig(variant="dae", epochs=120, patience=120,
                                 hidden=(16, 16), latent_dim=8, seed=0)
    imp, sur, _ = cooperative.train_conn(
        toy_ds, cfg, sur=toy_surrogate,
        stats=toy_surrogate.stats)
    return imp, sur
