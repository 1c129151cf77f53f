"""Best and mean fitness per generation for one seeded instance.

    python scripts/convergence.py --n 8 --seed 0 -o convergence.csv
"""

import argparse
from pathlib import Path

from rulplan.ga import GaConfig, history_to_csv, run_ga
from rulplan.model import generate_instance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pop", type=int, default=100)
    ap.add_argument("--gens", type=int, default=30)
    ap.add_argument("--rul-min", type=float, default=150.0)
    ap.add_argument("--rul-max", type=float, default=600.0)
    ap.add_argument("-o", "--output", default="convergence.csv")
    args = ap.parse_args()

    inst = generate_instance(args.n, rul_range=(args.rul_min, args.rul_max), seed=args.seed)
    result = run_ga(inst, GaConfig(population_size=args.pop, generations=args.gens, seed=args.seed))
    Path(args.output).write_text(history_to_csv(result.history), encoding="utf-8")

    first, last = result.history[0], result.history[-1]
    print(f"generation 0: best {first.best_fitness:.3f}, mean {first.mean_fitness:.3f}")
    print(f"generation {last.generation}: best {last.best_fitness:.3f}, mean {last.mean_fitness:.3f}")
    print(f"feasible={result.best_evaluation.feasible} route={list(result.best_route)}")
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
