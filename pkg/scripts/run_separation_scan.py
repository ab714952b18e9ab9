#!/usr/bin/env python3
"""Separation profiles for canonical index families.

Scans the near-return separation estimate over increasing horizons for the
all-integers, powers-of-two, and factorial families, prints the decay table
with each verdict, and optionally writes one CSV per family.

Usage:
    python3 scripts/run_separation_scan.py [--resolution 1e-6] [--csv-dir DIR]
"""

import argparse
import csv
import sys
from pathlib import Path

from jamison.sequences import IndexSequence, classify_jamison


FAMILIES = (
    ("integers", IndexSequence.integers_up_to(1000), (10, 100, 1000)),
    ("powers_of_two", IndexSequence.powers_of_two(12), (4, 8, 12)),
    ("factorials", IndexSequence.factorials(8), (4, 6, 8)),
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--resolution", type=float, default=1e-6)
    parser.add_argument("--refine-steps", type=int, default=48)
    parser.add_argument("--csv-dir", default=None, help="optional directory for decay CSVs")
    args = parser.parse_args()

    for name, seq, horizons in FAMILIES:
        result = classify_jamison(
            seq, horizons, resolution=args.resolution, refine_steps=args.refine_steps
        )
        print(f"\n{name} (terms: {len(seq)}), verdict: {result.verdict}")
        print("    K   torus floor   chord floor   witness")
        for rep in result.reports:
            print(
                f"{rep.horizon:>5}   {rep.epsilon_hat_torus:.6f}      "
                f"{rep.epsilon_hat:.6f}      {rep.witness.as_float():.9f}"
            )
        if result.decay_slope is not None:
            print(f"  log-log decay slope: {result.decay_slope:.3f}")
        if args.csv_dir:
            out = Path(args.csv_dir)
            out.mkdir(parents=True, exist_ok=True)
            with open(out / f"{name}_decay.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(("K", "epsilon_hat_torus", "epsilon_hat_chord", "witness_theta"))
                for rep in result.reports:
                    writer.writerow(
                        (rep.horizon, rep.epsilon_hat_torus, rep.epsilon_hat, rep.witness.as_float())
                    )
            print(f"  wrote {out / (name + '_decay.csv')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
