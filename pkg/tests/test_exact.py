import pytest
from hypothesis import given, strategies as st

from conftest import small_instance
from oracles import brute_force_opt, fixed_y_feasible
from mrmd.checks import validate_solution
from mrmd.exact import evaluate_fixed_y, solve_brute_force, solve_exact_bb
from mrmd.generate import instance_from_arrays
from mrmd.mcf import check_full_feasibility
from mrmd.preprocess import build_reachability


def overlapping():
    return instance_from_arrays(
        [0, 2], [5, 5], [5, 7], [["r"], ["r"]], ["a", "a"], {"r": [("a", 1)]}, [[0]], ["a"],
    )


def test_brute_force_overlapping_pair():
    inst = overlapping()
    sol = solve_brute_force(inst, build_reachability(inst))
    assert sol.objective == 7 and sol.served == {"d1"}


def test_brute_force_empty():
    inst = instance_from_arrays([], [], [], [], [], {"r": [("a", 1)]}, [[0]], ["a"])
    assert solve_brute_force(inst, build_reachability(inst)).objective == 0
    assert solve_exact_bb(inst, build_reachability(inst)).objective == 0


def test_brute_force_cap():
    inst = small_instance(1, max_demands=10)
    with pytest.raises(ValueError):
        solve_brute_force(inst, build_reachability(inst), cap=len(inst.demands) - 1)


def test_brute_force_tie_break_is_lexicographic():
    inst = instance_from_arrays(
        [0, 0], [5, 5], [4, 4], [["r"], ["r"]], ["a", "a"], {"r": [("a", 1)]}, [[0]], ["a"],
    )
    assert solve_brute_force(inst, build_reachability(inst)).served == {"d0"}


def test_evaluate_fixed_y_examples():
    inst = overlapping()
    reach = build_reachability(inst)
    assert evaluate_fixed_y(inst, reach, []).feasible
    assert evaluate_fixed_y(inst, reach, ["d0"]).reward == 5
    assert not evaluate_fixed_y(inst, reach, ["d0", "d1"]).feasible
    with pytest.raises(ValueError):
        evaluate_fixed_y(inst, reach, [], method="nope")


def test_budget_zero_returns_empty_incumbent():
    inst = small_instance(2)
    res = solve_exact_bb(inst, build_reachability(inst), budget=0)
    assert not res.optimal
    assert res.objective == 0 and not res.solution.served


def test_full_feasibility_returns_total_at_root():
    inst = instance_from_arrays(
        [0, 0, 10], [5, 5, 5], [3, 4, 5], [["r"], ["q"], ["r", "q"]], ["a"] * 3,
        {"r": [("a", 1)], "q": [("a", 1)]}, [[0]], ["a"],
    )
    reach = build_reachability(inst)
    assert check_full_feasibility(inst, reach).feasible
    res = solve_exact_bb(inst, reach)
    assert res.optimal and res.objective == inst.total_reward and res.nodes == 1


@given(st.integers(0, 100_000))
def test_brute_force_matches_oracle(seed):
    inst = small_instance(seed, max_demands=8)
    sol = solve_brute_force(inst, build_reachability(inst))
    assert sol.objective == brute_force_opt(inst)
    assert validate_solution(inst, sol) == []


@given(st.integers(0, 100_000))
def test_branch_and_bound_matches_brute_force(seed):
    inst = small_instance(seed, max_demands=12)
    reach = build_reachability(inst)
    res = solve_exact_bb(inst, reach)
    assert res.optimal
    assert res.objective == solve_brute_force(inst, reach).objective
    assert validate_solution(inst, res.solution) == []
    assert fixed_y_feasible(inst, [inst.demand_index[d] for d in res.solution.served])
    assert res.incumbents == sorted(res.incumbents)
    assert res.best_bound == res.objective
