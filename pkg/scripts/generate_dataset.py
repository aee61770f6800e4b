"""Generate the bundled concrete mix-design benchmark CSV.

The public 1,030-record compressive-strength benchmark is not
redistributable from inside this sandbox, so this script synthesizes a
deterministic stand-in with the same schema, the same row counts at every
protocol step (1030 rows, 749 at age <= 28), realistic marginal ranges,
and a water-binder / maturity strength law plus measurement noise. Point
the pipeline at the real file via the dataset config key when available;
nothing else changes.

Usage: python scripts/generate_dataset.py [--out data/concrete.csv]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

SEED = 20240601

# curing-age inventory: 749 rows at age <= 28 days, 281 later ages
AGE_COUNTS = {
    1: 2, 3: 134, 7: 126, 14: 62, 28: 425,
    56: 91, 90: 54, 91: 22, 100: 52, 120: 3,
    180: 26, 270: 13, 360: 6, 365: 14,
}

COLUMNS = ["cement", "bfs", "pfa", "water", "sp", "ca", "fa", "age", "strength"]


def sample_rows(rng: np.random.Generator) -> np.ndarray:
    n = sum(AGE_COUNTS.values())
    ages = np.repeat(list(AGE_COUNTS.keys()), list(AGE_COUNTS.values())).astype(float)
    rng.shuffle(ages)

    cement = rng.uniform(102.0, 540.0, n)
    bfs = np.where(rng.uniform(size=n) < 0.5, 0.0, rng.uniform(0.0, 359.0, n))
    pfa = np.where(rng.uniform(size=n) < 0.45, 0.0, rng.uniform(0.0, 200.0, n))
    water = rng.uniform(122.0, 247.0, n)
    sp = np.where(rng.uniform(size=n) < 0.3, 0.0, rng.uniform(0.0, 32.0, n))
    ca = rng.uniform(801.0, 1145.0, n)
    fa = rng.uniform(594.0, 993.0, n)

    binder = cement + 0.55 * bfs + 0.45 * pfa
    wb = water / np.maximum(binder, 100.0)
    base = 15.0 + 180.0 * np.exp(-3.2 * wb)
    # dosage optima make the strength law non-monotone in several variables,
    # and the cement interaction keeps the optima from being additive
    rich = 0.5 + cement / 540.0
    base += 9.0 * rich * np.exp(-((sp - 14.0) / 4.5) ** 2)
    base += 8.0 * np.exp(-((ca - 950.0) / 55.0) ** 2)
    base += 6.0 * rich * np.exp(-((bfs - 180.0) / 55.0) ** 2)
    base += 0.003 * (fa - 793.0)
    maturity = np.minimum(np.log1p(ages) / np.log1p(28.0), 1.25)
    strength = base * maturity + rng.normal(0.0, 4.0, n)
    strength = np.clip(strength, 2.5, 95.0)

    return np.column_stack([cement, bfs, pfa, water, sp, ca, fa, ages, strength])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/concrete.csv")
    args = parser.parse_args()

    rows = sample_rows(np.random.default_rng(SEED))
    assert rows.shape == (1030, 9)
    assert int((rows[:, 7] <= 28).sum()) == 749

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow([f"{v:.2f}" for v in row[:7]]
                            + [f"{row[7]:.0f}", f"{row[8]:.2f}"])
    print(f"wrote {rows.shape[0]} rows to {out}")


if __name__ == "__main__":
    main()
