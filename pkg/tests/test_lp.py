from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import small_instance
from mrmd.checks import validate_solution
from mrmd.exact import evaluate_fixed_y, solve_brute_force
from mrmd.generate import instance_from_arrays
from mrmd.lp import (
    SINK,
    BicriteriaError,
    build_lp_relaxation,
    dem,
    inflated_stocks,
    inflow,
    outflow,
    rebound_flows,
    run_bicriteria,
    solve_lp,
    src,
    total_flow,
)
from mrmd.mcf import check_full_feasibility
from mrmd.preprocess import build_reachability


def two_demands(gap=10):
    return instance_from_arrays(
        [0, gap], [5, 5], [3, 4], [["r"], ["r"]], ["a", "a"], {"r": [("a", 1)]}, [[0]], ["a"],
    )


def test_variable_and_row_counts():
    inst = two_demands()
    reach = build_reachability(inst)
    lp = build_lp_relaxation(inst, reach)
    # |D| + |B arcs| + |A arcs| + |D^r| sink arcs = 2 + 2 + 1 + 2
    assert lp.num_vars == 7
    # one stock row per (s, r), one conservation and one cover row per (r, i in D^r)
    assert lp.num_rows == 1 + 2 * 2


@given(st.integers(0, 100_000))
def test_counts_on_random_instances(seed):
    inst = small_instance(seed, max_demands=12)
    reach = build_reachability(inst)
    lp = build_lp_relaxation(inst, reach)
    views = [reach.view(r) for r in inst.type_ids]
    arcs = sum(len(reach_s) for v in views for _, _, reach_s in v.starts)
    arcs += sum(v.arc_count() + len(v.demands) for v in views)
    assert lp.num_vars == len(inst.demands) + arcs
    assert lp.num_rows == sum(len(v.starts) + 2 * len(v.demands) for v in views)


def test_no_demand_arcs_when_a_is_empty():
    inst = two_demands(gap=1)
    reach = build_reachability(inst)
    lp = build_lp_relaxation(inst, reach)
    assert not any(t[0] == "d" and h[0] == "d" for _, t, h in lp.x_index)


def test_empty_lp():
    inst = instance_from_arrays([], [], [], [], [], {"r": [("a", 1)]}, [[0]], ["a"])
    lp = build_lp_relaxation(inst, build_reachability(inst))
    assert solve_lp(lp).objective == 0
    assert solve_lp(lp, "exact").objective == 0


def test_yes_instance_lp_is_total_reward():
    inst = two_demands()
    frac = solve_lp(build_lp_relaxation(inst, build_reachability(inst)), "exact")
    assert frac.objective == inst.total_reward and frac.exact


def test_fractional_optimum_on_conflict():
    inst = two_demands(gap=1)
    lp = build_lp_relaxation(inst, build_reachability(inst))
    assert solve_lp(lp, "exact").objective == 4
    assert abs(solve_lp(lp).objective - 4) < 1e-9


def test_unknown_method():
    inst = two_demands()
    with pytest.raises(ValueError):
        solve_lp(build_lp_relaxation(inst, build_reachability(inst)), "nope")


@given(st.integers(0, 100_000))
def test_lp_sandwich_and_solver_agreement(seed):
    inst = small_instance(seed, max_demands=7)
    reach = build_reachability(inst)
    lp = build_lp_relaxation(inst, reach)
    fast = solve_lp(lp)
    exact = solve_lp(lp, "exact")
    assert exact.max_violation(lp) == 0
    assert fast.max_violation(lp) < 1e-9
    assert abs(float(exact.objective) - fast.objective) <= 1e-6 * max(1, inst.total_reward)
    opt = solve_brute_force(inst, reach).objective
    assert opt <= exact.objective <= inst.total_reward


# -- rebound_flows -----------------------------------------------------------------

S, J, K = src("a"), dem(0), dem(1)
F = Fraction


def test_rebound_identity_when_bounded():
    x = {(S, J): F(1), (J, K): F(1, 2), (J, SINK): F(1, 2), (K, SINK): F(1, 2), (S, K): F(0)}
    assert rebound_flows(x) == {a: v for a, v in x.items() if v}


def test_rebound_source_to_sink():
    assert rebound_flows({(S, SINK): F(3)}) == {(S, SINK): F(1)}


def test_rebound_source_not_sink_case():
    x = {(S, J): F(2), (J, K): F(1), (J, SINK): F(1), (K, SINK): F(1)}
    out = rebound_flows(x)
    assert out == {(S, J): F(1), (J, SINK): F(1), (S, K): F(1), (K, SINK): F(1)}


def test_rebound_missing_shortcut_raises():
    x = {(S, J): F(2), (J, K): F(1), (J, SINK): F(1), (K, SINK): F(1)}
    with pytest.raises(ValueError, match="triangle"):
        rebound_flows(x, arc_exists=lambda u, v: (u, v) != (S, K))


def type_flow(schedule):
    x = {}
    for loc, seq in schedule.paths:
        nodes = [src(loc)] + [dem(j) for j in seq] + [SINK]
        for a in zip(nodes, nodes[1:]):
            x[a] = x.get(a, F(0)) + 1
    return x


@given(st.integers(0, 100_000), st.integers(2, 4), st.data())
def test_rebound_postconditions(seed, scale, data):
    inst = small_instance(seed, max_demands=10)
    reach = build_reachability(inst)
    served = data.draw(st.sets(st.sampled_from(range(len(inst.demands)))))
    res = evaluate_fixed_y(inst, reach, served)
    if not res.feasible:
        return
    for r, sch in res.schedules.items():
        x = {a: v * scale for a, v in type_flow(sch).items()}
        trace = []
        out = rebound_flows(x, reach_checker(reach, r), trace)
        assert all(0 < v <= 1 for v in out.values())
        for j in reach.view(r).demands:
            assert inflow(out, dem(j)) == outflow(out, dem(j))
            if j in served:
                assert inflow(out, dem(j)) >= 1
        seq = [total_flow(x)] + trace
        assert all(b < a for a, b in zip(seq, seq[1:]))


def reach_checker(reach, r):
    view = reach.view(r)
    first = {loc: set(s) for loc, _, s in view.starts}

    def ok(u, v):
        if v == SINK:
            return True
        if u[0] == "s":
            return v[1] in first[u[1]]
        return reach.is_arc(r, u[1], v[1])

    return ok


# -- bicriteria --------------------------------------------------------------------


def test_inflated_stocks_round_up():
    inst = instance_from_arrays(
        [0], [1], [1], [["r"]], ["a"], {"r": [("a", 3)], "q": [("a", 1)]}, [[0]], ["a"],
    )
    assert inflated_stocks(inst, F(4, 5)) == {("r", "a"): 4, ("q", "a"): 2}
    assert inflated_stocks(inst, F(95, 100)) == {("r", "a"): 4, ("q", "a"): 2}


@pytest.mark.parametrize("method", ["highs", "exact"])
@pytest.mark.parametrize("k,eps", [(2, "0.1"), (5, "0.01")])
def test_fully_satisfiable_keeps_everything(method, k, eps):
    for seed in range(15):
        inst = small_instance(seed, max_demands=7)
        reach = build_reachability(inst)
        if not check_full_feasibility(inst, reach).feasible:
            continue
        res = run_bicriteria(inst, reach, k, F(eps), method)
        assert res.good == set(range(len(inst.demands)))
        assert res.objective == inst.total_reward
        assert all(res.stocks_used[key] <= res.stocks_allowed[key] for key in res.stocks_allowed)
        assert validate_solution(inst.with_stocks(res.stocks_allowed), res.solution) == []
        assert res.solution.certificate == f">= {k - 1}/{k}*LP, stocks <= ceil(l/({1 - k * F(eps)}))"


def test_bicriteria_argument_checks():
    inst = two_demands()
    reach = build_reachability(inst)
    with pytest.raises(ValueError):
        run_bicriteria(inst, reach, 10, F(1, 10))
    with pytest.raises(ValueError):
        run_bicriteria(inst, reach, 0, F(1, 10))


def test_bicriteria_reports_result_fields():
    inst = two_demands(gap=1)
    res = run_bicriteria(inst, build_reachability(inst), 2, 0.1)
    assert res.factor == F(4, 5)
    assert res.added_resources == 1
    assert np.isclose(float(res.lp.objective), 4)


def test_bicriteria_error_is_a_runtime_error():
    assert issubclass(BicriteriaError, RuntimeError)
