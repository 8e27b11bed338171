"""Acceptance criteria, one test each; the terminal summary lists a PASS/FAIL line per criterion."""

import time
from fractions import Fraction

import numpy as np

from conftest import c5_coloring, c5_instance, one_or_all_instance, small_config, small_instance, with_costs
from oracles import best_single_type, fixed_y_feasible
from mrmd.approx import (
    build_conflict_graph,
    greedy_color,
    run_algorithm_a,
    run_algorithm_b,
    run_algorithm_c,
    run_algorithm_e,
    run_algorithm_e_grouped,
)
from mrmd.bench import bicriteria_sweep
from mrmd.checks import validate_solution
from mrmd.costs import cost_bound_holds, run_algorithm_a_costs, solve_exact_costs
from mrmd.exact import solve_brute_force, solve_exact_bb
from mrmd.flow import solve_min_cost_flow
from mrmd.generate import (
    GeneratorConfig,
    build_n3dm_instance,
    generate_random_instance,
    n3dm_busy_reward,
    random_n3dm,
)
from mrmd.instance import Demand
from mrmd.lp import SINK, dem, inflow, outflow, run_bicriteria
from mrmd.mcf import (
    TypeSchedule,
    build_ipmr_network,
    check_full_feasibility,
    decompose_flow_to_paths,
    schedules_to_solution,
    solve_1r1d_instance,
    split_schedule_network,
)
from mrmd.preprocess import build_reachability


def report(record, number, failures, detail):
    ok = not failures
    record(number, ok, detail if ok else f"{detail}; first failure: {failures[0]}")
    assert ok, failures[:5]


def test_criterion_01_exact_matches_brute_force(record_acceptance):
    failures = []
    t0 = time.perf_counter()
    for seed in range(200):
        inst = small_instance(seed, max_demands=12, max_types=3)
        reach = build_reachability(inst)
        res = solve_exact_bb(inst, reach)
        brute = solve_brute_force(inst, reach)
        if not res.optimal or res.objective != brute.objective:
            failures.append(f"seed {seed}: bb {res.objective} vs brute {brute.objective}")
    elapsed = time.perf_counter() - t0
    if elapsed >= 60:
        failures.append(f"took {elapsed:.1f} s")
    report(record_acceptance, 1, failures, f"200 instances, exact == brute force, {elapsed:.1f} s (< 60 s)")


def test_criterion_02_single_type_optimality(record_acceptance):
    failures = []
    for seed in range(200):
        rng = np.random.default_rng([seed, 2])
        cfg = GeneratorConfig(
            1, int(rng.integers(1, 9)), int(rng.integers(1, 4)),
            grid=(4, 4), horizon=(0, 100), service=(5, 15, 40),
        )
        inst = generate_random_instance(cfg, seed)
        got = solve_1r1d_instance(inst, build_reachability(inst)).objective
        want = best_single_type(inst, inst.type_ids[0])
        if got != want:
            failures.append(f"seed {seed}: flow {got} vs enumeration {want}")
    report(record_acceptance, 2, failures, "200 single-type instances, flow optimum == schedule enumeration")


def test_criterion_03_full_feasibility(record_acceptance):
    failures = []
    feasible_count = 0
    for seed in range(200):
        inst = small_instance(seed, max_demands=8)
        got = check_full_feasibility(inst, build_reachability(inst)).feasible
        want = fixed_y_feasible(inst, range(len(inst.demands)))
        feasible_count += want
        if got != want:
            failures.append(f"seed {seed}: check {got} vs backtracking {want}")
    rng = np.random.default_rng(3)
    gadgets = 0
    for t in (1, 2, 3):
        for yes in (True, False):
            if t == 1 and not yes:
                continue  # with one triple every valid input is a yes-instance
            for _ in range(3):
                n3 = random_n3dm(rng, t, 8, yes=yes)
                inst = build_n3dm_instance(n3)
                res = solve_exact_bb(inst, build_reachability(inst))
                target = n3dm_busy_reward(n3)
                gadgets += 1
                if not res.optimal or (res.objective == target) != yes or res.objective > target:
                    failures.append(f"t={t} yes={yes}: optimum {res.objective}, busy reward {target}")
    report(
        record_acceptance, 3, failures,
        f"200 instances ({feasible_count} feasible) agree with backtracking; {gadgets} N3DM gadgets classified",
    )


def test_criterion_04_ratio_certificates(record_acceptance):
    failures = []
    for seed in range(100):
        inst = small_instance(seed, max_demands=10, shared_start=True)
        reach = build_reachability(inst)
        opt = solve_brute_force(inst, reach).objective
        col = greedy_color(build_conflict_graph(inst))
        a = run_algorithm_a(inst, reach)
        b = run_algorithm_b(inst, reach, col)
        c = run_algorithm_c(inst, reach, col)
        for name, sol, lhs, rhs in (
            ("A", a, len(inst.types) * a.objective, opt),
            ("B", b, col.a * b.objective, opt),
            ("C b=1", c, col.a * c.objective, col.b * opt),
        ):
            if lhs < rhs or validate_solution(inst, sol):
                failures.append(f"seed {seed} {name}: {lhs} < {rhs} or invalid")
    for seed in range(100):
        inst = c5_instance(seed)
        reach = build_reachability(inst)
        opt = solve_brute_force(inst, reach).objective
        col = c5_coloring()
        c = run_algorithm_c(inst, reach, col)
        if col.a * c.objective < col.b * opt or validate_solution(inst, c):
            failures.append(f"C5 seed {seed}: 5*{c.objective} < 2*{opt}")
    report(record_acceptance, 4, failures, "100 instances each: A, B (greedy), C (b=1), C (5:2 on C5); 0 violations")


def test_criterion_05_algorithm_e(record_acceptance):
    failures = []
    for grouped, fn in ((False, run_algorithm_e), (True, run_algorithm_e_grouped)):
        for seed in range(200):
            inst = one_or_all_instance(seed, grouped)
            sol = fn(inst)
            opt = solve_brute_force(inst, build_reachability(inst)).objective
            if sol.objective != opt or validate_solution(inst, sol):
                failures.append(f"{'grouped ' if grouped else ''}seed {seed}: {sol.objective} vs {opt}")
    report(record_acceptance, 5, failures, "200 instances each, E and grouped E == brute force")


def satisfiable_instance(seed):
    """Random instance cut down to an optimal served set, so every demand can be served."""
    inst = small_instance(seed, max_demands=8)
    best = solve_brute_force(inst, build_reachability(inst))
    return inst.with_demands(d for d in inst.demands if d.id in best.served)


def nearly_satisfiable_instance(seed, eps):
    """Satisfiable instance plus one clashing copy of a demand worth at most ``eps`` of the total."""
    base = satisfiable_instance(seed)
    w0 = base.total_reward
    w = int(eps * w0 / (1 - eps))
    if not base.demands or w < 1:
        return None
    d = base.demands[0]
    extra = Demand(d.id + "x", d.location, d.start, d.duration, w, d.requires)
    return base.with_demands(base.demands + (extra,))


def check_bicriteria(inst, k, eps):
    problems = []
    reach = build_reachability(inst)
    res = run_bicriteria(inst, reach, k, eps)
    total = inst.total_reward
    lp_val = float(res.lp.objective)
    if res.objective < (k - 1) / k * lp_val - 1e-6 * total:
        problems.append(f"objective {res.objective} < {(k - 1) / k:.2f} * LP {lp_val:.3f}")
    for key, used in res.stocks_used.items():
        if used > res.stocks_allowed[key]:
            problems.append(f"stock {key}: {used} > {res.stocks_allowed[key]}")
    if validate_solution(inst.with_stocks(res.stocks_allowed), res.solution):
        problems.append("solution invalid on inflated instance")
    for r, flow in res.bounded_flows.items():
        if any(v > 1 or v < 0 for v in flow.values()):
            problems.append(f"type {r}: arc above 1")
        for j in reach.view(r).demands:
            if inflow(flow, dem(j)) != outflow(flow, dem(j)):
                problems.append(f"type {r}: demand {j} not conserved")
            if j in res.good and inflow(flow, dem(j)) < 1:
                problems.append(f"type {r}: kept demand {j} inflow below 1")
        if any(a[0] == SINK for a in flow):
            problems.append(f"type {r}: flow leaves the sink")
    return problems


def test_criterion_06_bicriteria(record_acceptance):
    failures = []
    for k, eps in ((2, Fraction(1, 10)), (5, Fraction(1, 100))):
        full = near = 0
        seed = 0
        while full < 50 or near < 50:
            if full < 50:
                inst = satisfiable_instance(seed)
                failures += [f"full seed {seed} k={k}: {p}" for p in check_bicriteria(inst, k, eps)]
                full += 1
            if near < 50:
                inst = nearly_satisfiable_instance(seed, float(eps))
                if inst is not None:
                    opt = solve_brute_force(inst, build_reachability(inst)).objective
                    assert opt >= (1 - eps) * inst.total_reward
                    failures += [f"near seed {seed} k={k}: {p}" for p in check_bicriteria(inst, k, eps)]
                    near += 1
            seed += 1
    report(
        record_acceptance, 6, failures,
        "(k, eps) in {(2, 0.1), (5, 0.01)}: 50 fully and 50 (1-eps)-satisfiable instances each",
    )


def test_criterion_07_fixed_y_integrality(record_acceptance):
    failures = []
    found = 0
    seed = 0
    while found < 100:
        inst = small_instance(seed, max_demands=10)
        rng = np.random.default_rng([seed, 7])
        served = frozenset(j for j in range(len(inst.demands)) if rng.random() < 0.6)
        seed += 1
        if not fixed_y_feasible(inst, served):
            continue
        found += 1
        reach = build_reachability(inst)
        schedules = {}
        for r in inst.type_ids:
            view = reach.view(r)
            sn = split_schedule_network(build_ipmr_network(view, served))
            flow = solve_min_cost_flow(sn.net)
            if not flow.feasible or not all(isinstance(v, int) for v in flow.flow):
                failures.append(f"seed {seed - 1} type {r}: no integral flow")
                break
            paths = decompose_flow_to_paths(flow, sn)
            covered = frozenset(j for _, seq in paths for j in seq)
            if covered != served.intersection(view.demands):
                failures.append(f"seed {seed - 1} type {r}: paths cover {sorted(covered)}")
            schedules[r] = TypeSchedule(r, True, covered, tuple(paths))
        else:
            sol = schedules_to_solution(inst, served, schedules)
            problems = validate_solution(inst, sol)
            if problems:
                failures.append(f"seed {seed - 1}: {problems[0]}")
    report(record_acceptance, 7, failures, "100 feasible fixed-y sets: integral flows, valid path decompositions")


def test_criterion_08_costs(record_acceptance):
    failures = []
    for seed in range(100):
        inst = with_costs(small_instance(seed, max_demands=10, shared_start=True), np.zeros_like)
        reach = build_reachability(inst)
        res, obj = solve_exact_costs(inst, reach)
        plain = solve_exact_bb(inst, reach)
        if res.solution.served != plain.solution.served or obj.net != plain.objective:
            failures.append(f"zero-cost seed {seed}: exact differs")
        a_sol, a_obj = run_algorithm_a_costs(inst, reach)
        a_plain = run_algorithm_a(inst, reach)
        if a_sol.served != a_plain.served or a_obj.net != a_plain.objective:
            failures.append(f"zero-cost seed {seed}: A differs")
    checked = 0
    seed = 0
    while checked < 100:
        base = generate_random_instance(
            small_config(seed, max_demands=8, shared_start=True, reward_scale=10), seed
        )
        seed += 1
        if not base.demands:
            continue
        cap = min(d.reward for d in base.demands) // (2 * len(base.types))
        inst = with_costs(base, lambda f: np.minimum(f, cap))
        if not cost_bound_holds(inst):
            failures.append(f"seed {seed - 1}: constructed costs break the bound")
            continue
        reach = build_reachability(inst)
        sol, obj = run_algorithm_a_costs(inst, reach)
        _, best = solve_exact_costs(inst, reach)
        if 2 * len(inst.types) * obj.net < best.net or validate_solution(inst, sol, costs=True):
            failures.append(f"seed {seed - 1}: 2|R|*{obj.net} < {best.net}")
        checked += 1
    report(record_acceptance, 8, failures, "zero-cost reduction on 100 instances; 2|R|*net(A) >= OPT on 100 qualifying")


def test_criterion_09_desk_scale_envelope(record_acceptance):
    inst = generate_random_instance(GeneratorConfig(2, 100, 10), 0)
    t0 = time.perf_counter()
    res = solve_exact_bb(inst, build_reachability(inst), budget=300)
    elapsed = time.perf_counter() - t0
    failures = [] if res.optimal and elapsed < 300 else [f"optimal={res.optimal} after {elapsed:.1f} s"]
    report(record_acceptance, 9, failures, f"(|R|=2, |D|=100, L=10) seed 0 solved to optimality in {elapsed:.1f} s")


def test_criterion_10_resource_sweep(record_acceptance):
    failures = []
    gen = GeneratorConfig(3, 60, 6)
    notes = []
    for seed in range(3):
        pts = bicriteria_sweep(gen, seed, max_added=5, time_limit=60)
        objs = [p.objective for p in pts]
        notes.append("/".join(str(v) for v in objs))
        gains = np.diff(objs)
        if (gains < 0).any():
            failures.append(f"seed {seed}: decreasing {objs}")
        full = [k for k, p in enumerate(pts) if p.objective == p.total_reward]
        if full and any(objs[k] != pts[0].total_reward for k in range(full[0], len(objs))):
            failures.append(f"seed {seed}: moves after reaching full reward")
        half = len(gains) // 2
        if gains[:half].sum() < gains[-half:].sum():
            failures.append(f"seed {seed}: later gains exceed earlier gains {objs}")
    report(record_acceptance, 10, failures, f"(3, 60, 6) +0..5 units per type: {'; '.join(notes)}")
