"""Command-line entry point.

Exit codes: 0 success / feasible plan, 1 verification mismatch, 2 usage or
validation error, 3 best plan infeasible, 4 instance over the solver size limit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import secrets
import sys
import time
from pathlib import Path

from .evaluation import PermutationError, UnknownIdError
from .ga import GaConfig, history_to_csv, run_ga
from .model import Point2D, ValidationError, dump_instance, generate_instance, instance_to_dict, load_instance
from .oracle import OracleStatus, solve_exhaustive, solve_held_karp
from .service import DecisionService, PlanReport, build_plan_report, plan_from_route, recheck_plan

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_TOO_LARGE = 0, 1, 2, 3, 4

SOLVERS = {"exhaustive": solve_exhaustive, "held-karp": solve_held_karp}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed: {seed}", file=sys.stderr)
    return seed


def _ga_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = GaConfig()
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--pop", type=int, default=d.population_size, help="population size")
    g.add_argument("--gens", type=int, default=d.generations, help="number of generations")
    g.add_argument("--cxpb", type=float, default=d.crossover_prob, help="crossover probability")
    g.add_argument("--cx-swap", type=float, default=d.crossover_swap_prob, help="per-position PMX rate")
    g.add_argument("--mutpb", type=float, default=d.mutation_prob, help="mutation probability")
    g.add_argument("--mut-swap", type=float, default=d.mutation_swap_prob, help="per-position swap rate")
    g.add_argument("--tournament", type=int, default=d.tournament_size)
    g.add_argument("--elitism", type=int, default=d.elitism_count)
    g.add_argument("--penalty", type=float, default=d.penalty_coefficient, help="lateness penalty")
    g.add_argument("--seed", type=int, default=None, help="RNG seed (drawn and printed if omitted)")
    g.add_argument("--workers", type=int, default=None, help="threads for fitness evaluation")
    return p


def _config_from(args, seed: int) -> GaConfig:
    return GaConfig(
        population_size=args.pop,
        generations=args.gens,
        crossover_prob=args.cxpb,
        crossover_swap_prob=args.cx_swap,
        mutation_prob=args.mutpb,
        mutation_swap_prob=args.mut_swap,
        tournament_size=args.tournament,
        elitism_count=args.elitism,
        penalty_coefficient=args.penalty,
        seed=seed,
    )


def _write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _offline_plan_id(instance, config: GaConfig) -> str:
    # Content-derived so repeated offline solves produce identical files.
    blob = json.dumps([instance_to_dict(instance), config.__dict__], sort_keys=True)
    return "solve-" + hashlib.sha256(blob.encode()).hexdigest()[:16]


def cmd_gen(args) -> int:
    seed = _resolve_seed(args.seed)
    inst = generate_instance(
        args.n,
        area=tuple(args.bounds),
        rul_range=(args.rul_min, args.rul_max),
        seed=seed,
        travel_speed=args.speed,
        return_to_center=args.return_to_center,
        hourly_wage=args.wage,
    )
    dump_instance(inst, args.output)
    print(args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    config = _config_from(args, _resolve_seed(args.seed))
    result = run_ga(inst, config, workers=args.workers)
    plan = build_plan_report(inst, result, _offline_plan_id(inst, config), None)
    if args.history:
        Path(args.history).write_text(history_to_csv(result.history), encoding="utf-8")
    if args.plan:
        _write_json(args.plan, plan.to_dict())
    status = "feasible" if plan.feasible else "INFEASIBLE"
    print(f"{status} distance={plan.total_distance:.6f} fitness={result.best_evaluation.fitness:.6f}")
    print("route: " + " -> ".join(["center", *plan.asset_ids]))
    return EXIT_OK if plan.feasible else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    solver = SOLVERS[args.method]
    res = solver(inst, max_n=args.max_n) if args.max_n else solver(inst)
    if res.status is OracleStatus.TOO_LARGE:
        print(f"instance-too-large: n={inst.n} exceeds the {args.method} limit", file=sys.stderr)
        return EXIT_TOO_LARGE
    if res.status is OracleStatus.INFEASIBLE:
        print("no-feasible-route")
        if args.output:
            _write_json(args.output, res.to_dict())
        return EXIT_INFEASIBLE
    ev = res.best_evaluation
    plan = plan_from_route(
        inst, res.best_route, ev, f"{args.method}-optimal", None,
        {"solver": args.method, "status": res.status.value},
    )
    if args.output:
        _write_json(args.output, plan.to_dict())
    print(f"optimal distance={ev.total_distance:.6f}")
    print("route: " + " -> ".join(["center", *plan.asset_ids]))
    return EXIT_OK


COMPARE_HEADER = (
    "instance", "n", "oracle_distance", "ga_distance", "relative_gap",
    "ga_feasible", "oracle_ms", "ga_ms",
)


def compare(count: int, n: int, base_seed: int, config: GaConfig, *, area, rul_range, method="held-karp"):
    """GA vs exact optimum on ``count`` seeded instances. Returns (rows, summary)."""
    solver = SOLVERS[method]
    rows = []
    for k in range(count):
        inst = generate_instance(n, area=area, rul_range=rul_range, seed=base_seed + k)
        t0 = time.perf_counter()
        res = solver(inst)
        t1 = time.perf_counter()
        ga = run_ga(inst, config.with_overrides(seed=config.seed + k))
        t2 = time.perf_counter()
        if res.status is OracleStatus.TOO_LARGE:
            raise OverflowError(f"n={n} exceeds the {method} size limit")
        ga_dist = ga.best_evaluation.total_distance
        opt = res.distance
        gap = None
        if opt is not None and ga.best_evaluation.feasible:
            gap = 0.0 if ga_dist == opt else (ga_dist - opt) / opt
        rows.append({
            "instance": f"seed{base_seed + k}",
            "n": n,
            "oracle_distance": opt,
            "ga_distance": ga_dist,
            "relative_gap": gap,
            "ga_feasible": ga.best_evaluation.feasible,
            "oracle_ms": (t1 - t0) * 1e3,
            "ga_ms": (t2 - t1) * 1e3,
        })
    gaps = [r["relative_gap"] for r in rows if r["relative_gap"] is not None]
    summary = {
        "instances": len(rows),
        "compared": len(gaps),
        "mean_gap": sum(gaps) / len(gaps) if gaps else None,
        "max_gap": max(gaps) if gaps else None,
        # 1e-9 relative slack absorbs summation-order noise between equal tours.
        "optimal_hit_rate": sum(g <= 1e-9 for g in gaps) / len(gaps) if gaps else None,
    }
    return rows, summary


def cmd_compare(args) -> int:
    seed = _resolve_seed(args.seed)
    config = _config_from(args, seed)
    try:
        rows, summary = compare(
            args.count, args.n, args.instance_seed, config,
            area=tuple(args.bounds), rul_range=(args.rul_min, args.rul_max), method=args.method,
        )
    except OverflowError as exc:
        print(f"instance-too-large: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    out = open(args.csv, "w", newline="", encoding="utf-8") if args.csv else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=COMPARE_HEADER, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in r.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    fmt = lambda v: "n/a" if v is None else f"{v:.6g}"
    print(
        f"instances={summary['instances']} compared={summary['compared']} "
        f"mean_gap={fmt(summary['mean_gap'])} max_gap={fmt(summary['max_gap'])} "
        f"optimal_hit_rate={fmt(summary['optimal_hit_rate'])}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    plan = PlanReport.from_dict(json.loads(Path(args.plan).read_text(encoding="utf-8")))
    ev = recheck_plan(plan, inst)
    ok = ev.feasible == plan.feasible and all(
        abs(v.slack - (v.deadline - t)) <= 1e-9 and abs(v.arrival_time - t) <= 1e-9
        for v, t in zip(plan.visits, ev.arrival_times)
    )
    print("consistent" if ok else "MISMATCH")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_serve(args) -> int:
    from .server import make_server

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(message)s")
    service = DecisionService(
        args.log,
        args.plans,
        center=Point2D(args.center_x, args.center_y),
        travel_speed=args.speed,
        hourly_wage=args.wage,
    )
    server = make_server(service, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port} ({len(service.list_assets())} assets loaded)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rulplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    ga = _ga_flags()

    p = sub.add_parser("gen", help="write a random instance file")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bounds", type=float, nargs=4, default=[0.0, 0.0, 100.0, 100.0],
                   metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--rul-min", type=float, default=50.0)
    p.add_argument("--rul-max", type=float, default=500.0)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--wage", type=float, default=0.0)
    p.add_argument("--return-to-center", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[ga], help="run the GA on an instance file")
    p.add_argument("instance")
    p.add_argument("--history", help="write the convergence CSV here")
    p.add_argument("--plan", help="write the plan JSON here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="solve an instance exactly")
    p.add_argument("instance")
    p.add_argument("--method", choices=sorted(SOLVERS), default="held-karp")
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("compare", parents=[ga], help="GA vs exact solver on seeded instances")
    p.add_argument("--count", type=_positive_int, default=20)
    p.add_argument("--n", type=_positive_int, default=8)
    p.add_argument("--instance-seed", type=int, default=0, help="seed of the first instance")
    p.add_argument("--bounds", type=float, nargs=4, default=[0.0, 0.0, 100.0, 100.0],
                   metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--rul-min", type=float, default=1000.0)
    p.add_argument("--rul-max", type=float, default=2000.0)
    p.add_argument("--method", choices=sorted(SOLVERS), default="held-karp")
    p.add_argument("--csv", help="write per-instance rows here instead of stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="re-evaluate a plan JSON against its instance")
    p.add_argument("plan")
    p.add_argument("instance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="run the decision service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.environ.get("RULPLAN_PORT", "8080")))
    p.add_argument("--log", default=os.environ.get("RULPLAN_LOG"), help="RUL update log (JSON lines)")
    p.add_argument("--plans", default=None, help="plan store (JSON lines)")
    p.add_argument("--center-x", type=float, default=0.0)
    p.add_argument("--center-y", type=float, default=0.0)
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--wage", type=float, default=0.0)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, PermutationError, UnknownIdError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
