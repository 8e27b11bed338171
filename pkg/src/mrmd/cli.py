"""Command-line entry point.

Exit codes: 0 success, 1 infeasible input or violated precondition, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .approx import (
    Coloring,
    run_algorithm_a,
    run_algorithm_b,
    run_algorithm_c,
    run_algorithm_e,
    run_algorithm_e_grouped,
)
from .bench import BenchConfig, rows_to_csv, run_benchmark_suite, run_sweep_suite, summarize, sweep_to_csv
from .checks import validate_solution
from .costs import run_algorithm_a_costs, solve_exact_costs
from .exact import solve_brute_force, solve_exact_bb
from .flow import to_dimacs
from .generate import GeneratorConfig, N3dmInput, build_n3dm_instance, generate_random_instance, n3dm_busy_reward
from .instance import InstanceError, InstanceValidationError, PreconditionError
from .io import parse_instance, serialize_instance, serialize_solution
from .lp import BicriteriaError, run_bicriteria
from .mcf import build_ipmr_network, check_full_feasibility, split_schedule_network
from .preprocess import build_reachability, dump_coordinate_lists

ALGOS = ("exact", "brute", "a", "b", "c", "e", "e-grouped", "bicriteria")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(data: bytes | str, out: str | None) -> None:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    if out:
        Path(out).write_text(data)
    else:
        sys.stdout.write(data)


def _load(path: str):
    return parse_instance(Path(path).read_bytes())


def load_coloring(path: str) -> Coloring:
    """``{"a": 5, "b": 2, "nodes": [{"types": ["1", "2"], "colors": [1, 3]}, ...]}``"""
    raw = json.loads(Path(path).read_text())
    assign = {frozenset(str(t) for t in n["types"]): frozenset(int(c) for c in n["colors"]) for n in raw["nodes"]}
    return Coloring(int(raw["a"]), int(raw["b"]), assign)


def cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        n_types=args.types,
        n_demands=args.demands,
        total_resources=args.resources,
        grid=(args.width, args.height),
        reward_scale=100 if args.scaled else 1,
        shared_start=args.shared_start,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise SystemExit(_usage(str(exc)))
    _emit(serialize_instance(generate_random_instance(cfg, args.seed)), args.out)
    return 0


def cmd_validate(args) -> int:
    inst = _load(args.instance)
    print(f"ok: {len(inst.demands)} demands, {len(inst.types)} types, {len(inst.locations)} locations")
    return 0


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    reach = build_reachability(inst)
    algo = args.algo
    note = None
    if args.costs and algo not in ("exact", "brute", "a"):
        raise SystemExit(_usage("--costs works with --algo exact, brute or a"))
    if algo == "exact":
        if args.costs:
            res, obj = solve_exact_costs(inst, reach, args.time_limit)
            note = f"gross {obj.gross}, travel cost {obj.cost}"
        else:
            res = solve_exact_bb(inst, reach, args.time_limit)
        sol = res.solution.with_certificate("optimal" if res.optimal else f"<= {res.best_bound}")
    elif algo == "brute":
        sol = solve_brute_force(inst, reach, cap=args.brute_cap, costs=args.costs).with_certificate("optimal")
    elif algo == "a":
        if args.costs:
            sol, obj = run_algorithm_a_costs(inst, reach, force=args.force)
            note = f"gross {obj.gross}, travel cost {obj.cost}"
        else:
            sol = run_algorithm_a(inst, reach)
    elif algo == "b":
        sol = run_algorithm_b(inst, reach, load_coloring(args.coloring) if args.coloring else None)
    elif algo == "c":
        if args.coloring:
            sol = run_algorithm_c(inst, reach, load_coloring(args.coloring))
        else:
            sol = run_algorithm_b(inst, reach)
    elif algo == "e":
        sol = run_algorithm_e(inst)
    elif algo == "e-grouped":
        sol = run_algorithm_e_grouped(inst)
    else:
        res = run_bicriteria(inst, reach, args.k, Fraction(args.eps))
        sol = res.solution
        note = f"kept {len(res.good)} of {len(inst.demands)} demands, {res.added_resources} extra units allowed"
        inst = inst.with_stocks(res.stocks_allowed)
    problems = validate_solution(inst, sol, costs=args.costs)
    if problems:  # pragma: no cover - solver bug guard
        for v in problems:
            print(f"internal error: {v}", file=sys.stderr)
        return 1
    _emit(serialize_solution(sol, inst), args.out)
    msg = f"objective {sol.objective}" + (f" ({sol.certificate})" if sol.certificate else "")
    print(msg + (f"; {note}" if note else ""), file=sys.stderr)
    return 0


def cmd_feasible(args) -> int:
    inst = _load(args.instance)
    res = check_full_feasibility(inst, build_reachability(inst))
    if res.feasible:
        print("feasible: every demand can be served")
        if args.out:
            _emit(serialize_solution(res.solution, inst), args.out)
        return 0
    print(f"infeasible: types {', '.join(res.infeasible_types())} cannot cover their demands")
    return 1


def cmd_dump(args) -> int:
    inst = _load(args.instance)
    reach = build_reachability(inst)
    if args.what == "ab":
        a_txt, b_txt = dump_coordinate_lists(reach, inst)
        _emit("# A\n" + a_txt + "# B\n" + b_txt, args.out)
        return 0
    type_id = args.type or inst.type_ids[0]
    if type_id not in inst.type_index:
        raise SystemExit(_usage(f"unknown type {type_id!r}"))
    view = reach.view(type_id)
    sn = split_schedule_network(build_ipmr_network(view, view.demands))
    _emit(to_dimacs(sn.net), args.out)
    return 0


def cmd_bench(args) -> int:
    cfg = BenchConfig.from_json(Path(args.grid).read_text()) if args.grid else BenchConfig()
    if args.time_limit is not None:
        cfg = BenchConfig(cfg.cells, cfg.seeds, args.time_limit, cfg.solvers, cfg.reward_scale, cfg.shared_start)
    rows = run_benchmark_suite(cfg, progress=lambda r: print(r, file=sys.stderr) if args.verbose else None)
    _emit(rows_to_csv(rows), args.out)
    if args.summary:
        Path(args.summary).write_text(rows_to_csv(summarize(rows)))
    return 0


def cmd_sweep(args) -> int:
    gen = GeneratorConfig(args.types, args.demands, args.resources)
    points = run_sweep_suite(gen, range(args.seed, args.seed + args.seeds), args.max_added, args.time_limit)
    _emit(sweep_to_csv(points), args.out)
    return 0


def cmd_n3dm(args) -> int:
    n3 = N3dmInput(args.t, args.d, args.a, args.b, args.c)
    try:
        n3.validate()
    except ValueError as exc:
        raise SystemExit(_usage(str(exc)))
    inst = build_n3dm_instance(n3)
    if args.solve:
        res = solve_exact_bb(inst, build_reachability(inst), args.time_limit)
        target = n3dm_busy_reward(n3)
        hit = res.objective == target
        print(f"optimum {res.objective}, all-busy reward {target}: {'yes' if hit else 'no'}-instance", file=sys.stderr)
    _emit(serialize_instance(inst), args.out)
    return 0


def _usage(msg: str) -> int:
    print(f"usage error: {msg}", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mrmd", description="Multi-resource multi-demand allocation solvers.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random grid instance")
    g.add_argument("--types", type=int, default=2)
    g.add_argument("--demands", type=int, default=100)
    g.add_argument("--resources", type=int, default=10, help="total units, split evenly over types")
    g.add_argument("--width", type=int, default=20)
    g.add_argument("--height", type=int, default=20)
    g.add_argument("--scaled", action="store_true", help="multiply rewards by 100")
    g.add_argument("--shared-start", action="store_true", help="all units start at one grid point")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check an instance file")
    v.add_argument("instance")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("solve", help="solve an instance and write the solution as JSON")
    s.add_argument("instance")
    s.add_argument("--algo", choices=ALGOS, default="exact")
    s.add_argument("--k", type=int, default=2, help="bicriteria k")
    s.add_argument("--eps", default="0.1", help="bicriteria eps, e.g. 0.01 or 1/100")
    s.add_argument("--costs", action="store_true", help="maximise reward minus travel cost")
    s.add_argument("--force", action="store_true", help="run costed Algorithm A without its cost bound")
    s.add_argument("--time-limit", type=float, default=None, help="seconds for the exact search")
    s.add_argument("--coloring", help="JSON colouring for algorithms b and c")
    s.add_argument("--brute-cap", type=int, default=16)
    s.add_argument("--seed", type=int, default=0, help="accepted for uniformity; solvers are deterministic")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("feasible", help="can every demand be served?")
    f.add_argument("instance")
    f.add_argument("--out", help="write the covering solution here when feasible")
    f.set_defaults(func=cmd_feasible)

    d = sub.add_parser("dump", help="print reachability lists or a DIMACS flow network")
    d.add_argument("instance")
    d.add_argument("what", choices=("ab", "dimacs"))
    d.add_argument("--type", help="resource type for dimacs (default: first)")
    d.add_argument("--out")
    d.set_defaults(func=cmd_dump)

    b = sub.add_parser("bench", help="run the benchmark grid and write CSV")
    b.add_argument("--grid", help="JSON grid file (cells, seeds, time_limit, solvers, ...)")
    b.add_argument("--out")
    b.add_argument("--summary", help="also write per-cell averages here")
    b.add_argument("--time-limit", type=float)
    b.add_argument("--verbose", action="store_true")
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("sweep", help="exact objective as units are added to every type")
    w.add_argument("--types", type=int, default=3)
    w.add_argument("--demands", type=int, default=60)
    w.add_argument("--resources", type=int, default=6)
    w.add_argument("--max-added", type=int, default=6)
    w.add_argument("--seeds", type=int, default=3)
    w.add_argument("--seed", type=int, default=0, help="first seed")
    w.add_argument("--time-limit", type=float, default=60.0)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)

    n = sub.add_parser("n3dm", help="build the instance encoding a numerical 3-dimensional matching input")
    n.add_argument("--t", type=int, required=True)
    n.add_argument("--d", type=int, required=True)
    n.add_argument("--a", type=_ints, required=True)
    n.add_argument("--b", type=_ints, required=True)
    n.add_argument("--c", type=_ints, required=True)
    n.add_argument("--solve", action="store_true", help="also solve it and report yes/no")
    n.add_argument("--time-limit", type=float, default=None)
    n.add_argument("--out")
    n.add_argument("--seed", type=int, default=0, help="accepted for uniformity")
    n.set_defaults(func=cmd_n3dm)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InstanceValidationError as exc:
        for v in exc.violations:
            print(f"violation: {v}", file=sys.stderr)
        return 1
    except (InstanceError, PreconditionError, BicriteriaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
