"""Optimality gap of the GA against Held-Karp on a batch of seeded instances.

Prints one row per instance and the hit-rate summary; --csv writes the rows.
"""

import argparse
import csv
import sys

from rulplan.cli import compare
from rulplan.ga import GaConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0, help="first instance seed")
    ap.add_argument("--pop", type=int, default=100)
    ap.add_argument("--gens", type=int, default=30)
    ap.add_argument("--rul-min", type=float, default=1000.0)
    ap.add_argument("--rul-max", type=float, default=2000.0)
    ap.add_argument("--csv")
    args = ap.parse_args()

    config = GaConfig(population_size=args.pop, generations=args.gens)
    rows, summary = compare(
        args.count, args.n, args.seed, config, area=(0.0, 0.0, 100.0, 100.0), rul_range=(args.rul_min, args.rul_max)
    )
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    writer = csv.DictWriter(out, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    if args.csv:
        out.close()
    print(" ".join(f"{k}={v}" for k, v in summary.items()))


if __name__ == "__main__":
    main()
