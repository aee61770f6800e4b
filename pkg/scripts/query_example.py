"""Worked partial inverse-design example.

Trains the cooperative DAE on split seed 0, then asks for the missing
cement, fly-ash and coarse-aggregate dosages of a mix whose other five
variables are fixed and whose target strength is 55.5 MPa.

Usage:
    python3 scripts/query_example.py
"""

import argparse

from mixdesign import cooperative, dataio, evaluation

FIXED = {"bfs": 212.5, "water": 155.7, "sp": 14.3, "fa": 880.4, "age": 28.0}
TARGET = 55.5


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", default="data/concrete.csv")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--target", type=float, default=TARGET)
    args = ap.parse_args()

    ds = dataio.filter_by_age(dataio.load_dataset(args.dataset), 28.0)
    cfg = evaluation.SweepConfig(alpha=0.3, hidden=(128, 128), epochs=800,
                                 patience=200, val_fraction=0.0)
    print(f"training cooperative DAE on split seed {args.seed} ...")
    split = evaluation.prepare_split(ds, args.seed, cfg,
                                     methods=("coop-dae",))

    query = cooperative.InverseQuery(fixed=FIXED,
                                     target_strength=args.target)
    results = cooperative.infer_partial(split.imputers["coop-dae"],
                                        split.evaluator, split.stats, query)
    design, pred = results[0]
    free = [v for v in dataio.DESIGN_VARS if v not in FIXED]
    print(f"\ntarget strength: {args.target:.1f} MPa")
    print(f"predicted strength: {pred:.2f} MPa "
          f"(deviation {pred - args.target:+.2f})")
    print("\nfixed variables:")
    for name in FIXED:
        print(f"  {name:<8} {design[name]:>9.2f}")
    print("inferred variables:")
    for name in free:
        print(f"  {name:<8} {design[name]:>9.2f}")


if __name__ == "__main__":
    main()
