"""Exact solvers: subset enumeration and branch-and-bound over served demands.

Once the set of served demands is fixed, the problem falls apart into one
flow problem per resource type, so both solvers search over served sets
only and hand the routing to :mod:`mrmd.mcf`.

The branch-and-bound bound splits each demand's reward evenly across its
required types and solves every type's schedule problem on the split
rewards.  The sum over types is an upper bound because the served part of
any feasible solution is schedulable for each type on its own.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .instance import Instance, Solution, empty_solution
from .mcf import TypeSchedule, schedules_to_solution, solve_1r1d, solve_ipmr
from .preprocess import ReachabilityData

COVER = "cover"
IPMR = "ipmr"


@dataclass(frozen=True)
class FixedYResult:
    feasible: bool
    schedules: Mapping[str, TypeSchedule]
    reward: int = 0
    cost: int = 0
    solution: Solution | None = None

    @property
    def net(self) -> int:
        return self.reward - self.cost


@dataclass(frozen=True)
class SearchNode:
    fixed_one: frozenset[int]
    fixed_zero: frozenset[int]
    undecided: frozenset[int]
    bound: int


@dataclass
class ExactResult:
    solution: Solution
    optimal: bool
    nodes: int = 0
    best_bound: int = 0
    incumbents: list[int] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def objective(self) -> int:
        return self.solution.objective


def demand_indices(inst: Instance, served: Iterable) -> frozenset[int]:
    idx = inst.demand_index
    return frozenset(idx[s] if isinstance(s, str) else int(s) for s in served)


def cost_function(inst: Instance, scale: int = 1):
    """Arc cost callback over start location ids and demand indices."""
    c = inst.cost_matrix
    li = inst.location_index
    dloc = [li[d.location] for d in inst.demands]

    def arc_cost(prev, j: int) -> int:
        a = li[prev] if isinstance(prev, str) else dloc[prev]
        return int(c[a, dloc[j]]) * scale

    return arc_cost


def evaluate_fixed_y(
    inst: Instance,
    reach: ReachabilityData,
    served: Iterable,
    method: str = COVER,
    costs: bool = False,
) -> FixedYResult:
    """Route a fixed served set, one flow problem per type.

    ``method="cover"`` solves each type as a schedule problem that must
    cover the served demands; ``method="ipmr"`` builds the node-capacitated
    feasibility network literally.  With ``costs`` the cover is of minimum
    travel cost and the result carries it.
    """
    sel = demand_indices(inst, served)
    if method not in (COVER, IPMR):
        raise ValueError(f"unknown method {method!r}")
    if costs and method != COVER:
        raise ValueError("travel costs need the cover method")
    arc_cost = cost_function(inst) if costs else None
    schedules = {}
    for r in inst.type_ids:
        view = reach.view(r)
        need = sel.intersection(view.demands)
        if method == IPMR:
            sch = solve_ipmr(view, need)
        else:
            sch = solve_1r1d(view.restricted(need), {}, need, arc_cost)
        schedules[r] = sch
        if not sch.feasible:
            return FixedYResult(False, schedules)
    reward = sum(inst.demands[j].reward for j in sel)
    cost = sum(s.cost for s in schedules.values())
    sol = schedules_to_solution(inst, sel, schedules, reward - cost)
    return FixedYResult(True, schedules, reward, cost, sol)


def solve_brute_force(inst: Instance, reach: ReachabilityData, cap: int = 16, costs: bool = False) -> Solution:
    """Best served set by enumeration; ties go to the lexicographically smallest index set.

    Supersets of an unroutable set are skipped (a sub-schedule of a feasible
    schedule is feasible), and branches whose remaining reward cannot reach
    the best value so far are cut.  Both cuts keep the enumeration exact.
    """
    n = len(inst.demands)
    if n > cap:
        raise ValueError(f"{n} demands exceeds the brute-force cap of {cap}")
    rewards = [d.reward for d in inst.demands]
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + rewards[k]
    arc_cost = cost_function(inst) if costs else None
    views = {r: reach.view(r) for r in inst.type_ids}
    requires = [sorted(d.requires) for d in inst.demands]
    cache: dict[tuple[str, frozenset[int]], TypeSchedule] = {}

    def route(r: str, need: frozenset[int]) -> TypeSchedule:
        key = (r, need)
        if key not in cache:
            cache[key] = solve_1r1d(views[r].restricted(need), {}, need, arc_cost)
        return cache[key]

    def value(chosen: tuple[int, ...]) -> int | None:
        s = frozenset(chosen)
        total = sum(rewards[j] for j in chosen)
        for r, view in views.items():
            need = s.intersection(view.demands)
            sch = route(r, need)
            if not sch.feasible:
                return None
            total -= sch.cost
        return total

    best_val = 0
    best_set: tuple[int, ...] = ()

    def better(val: int, chosen: tuple[int, ...]) -> bool:
        return val > best_val or (val == best_val and chosen < best_set)

    def dfs(k: int, chosen: tuple[int, ...], reward: int) -> None:
        nonlocal best_val, best_set
        if reward + suffix[k] < best_val:
            return
        if k == n:
            return
        ext = chosen + (k,)
        ok = True
        s = frozenset(ext)
        for r in requires[k]:
            if not route(r, s.intersection(views[r].demands)).feasible:
                ok = False
                break
        if ok:
            val = value(ext) if costs else reward + rewards[k]
            if better(val, ext):
                best_val, best_set = val, ext
            dfs(k + 1, ext, reward + rewards[k])
        dfs(k + 1, chosen, reward)

    dfs(0, (), 0)
    if not best_set:
        return empty_solution(inst)
    res = evaluate_fixed_y(inst, reach, best_set, costs=costs)
    return res.solution


class _BranchAndBound:
    def __init__(self, inst: Instance, reach: ReachabilityData, budget: float | None, costs: bool):
        self.inst = inst
        self.reach = reach
        self.costs = costs
        self.deadline = None if budget is None else time.monotonic() + budget
        self.views = {r: reach.view(r) for r in inst.type_ids}
        self.rewards = [d.reward for d in inst.demands]
        self.requires = [sorted(d.requires) for d in inst.demands]
        self.scale = math.lcm(*(len(d.requires) for d in inst.demands)) if inst.demands else 1
        self.split = {
            r: {j: self.rewards[j] * self.scale // len(inst.demands[j].requires) for j in v.demands}
            for r, v in self.views.items()
        }
        self.arc_cost = cost_function(inst, self.scale) if costs else None
        self.best = empty_solution(inst)
        self.best_val = 0
        self.history = [0]
        self.nodes = 0

    def out_of_time(self) -> bool:
        return self.deadline is not None and time.monotonic() >= self.deadline

    def type_bound(self, r: str, zero: frozenset[int], one: frozenset[int]) -> TypeSchedule:
        view = self.views[r]
        avail = [j for j in view.demands if j not in zero]
        weights = {j: self.split[r][j] for j in avail}
        forced = one.intersection(view.demands)
        return solve_1r1d(view.restricted(avail), weights, forced, self.arc_cost)

    def child(self, parent: dict[str, TypeSchedule], d: int, one: frozenset[int], zero: frozenset[int], take: bool):
        sched = dict(parent)
        for r in self.requires[d]:
            if (d in parent[r].served) != take:
                sched[r] = self.type_bound(r, zero, one)
                if not sched[r].feasible:
                    return None
        return sched

    def offer(self, chosen: frozenset[int]) -> None:
        reward = sum(self.rewards[j] for j in chosen)
        if reward <= self.best_val:
            return
        res = evaluate_fixed_y(self.inst, self.reach, chosen, costs=self.costs)
        if res.feasible and res.net > self.best_val:
            self.best_val = res.net
            self.best = res.solution
            self.history.append(res.net)

    def run(self) -> ExactResult:
        start = time.monotonic()
        n = len(self.inst.demands)
        if self.deadline is not None and self.deadline <= start:
            return ExactResult(self.best, False, 0, self._bound_int(None), self.history, 0.0)
        root = {r: self.type_bound(r, frozenset(), frozenset()) for r in self.views}
        heap: list = []
        seq = 0

        def push(one, zero, sched):
            nonlocal seq
            bound = sum(s.objective for s in sched.values())
            heapq.heappush(heap, (-bound, seq, one, zero, sched))
            seq += 1

        push(frozenset(), frozenset(), root)
        optimal = True
        while heap:
            if self.out_of_time():
                optimal = False
                break
            neg, _, one, zero, sched = heapq.heappop(heap)
            if self._floor(-neg) <= self.best_val:
                continue
            self.nodes += 1
            consistent = frozenset(
                j for j in range(n)
                if j not in zero and all(j in sched[r].served for r in self.requires[j])
            )
            self.offer(consistent)
            if self._floor(-neg) <= self.best_val:
                continue
            conflicted = [
                j for j in range(n)
                if j not in zero and j not in one
                and any(j in sched[r].served for r in self.requires[j])
                and j not in consistent
            ]
            if not conflicted:
                continue
            d = min(conflicted, key=lambda j: (-self.rewards[j], j))
            one_d, zero_d = one | {d}, zero | {d}
            left = self.child(sched, d, one_d, zero, True)
            if left is not None:
                push(one_d, zero, left)
            right = self.child(sched, d, one, zero_d, False)
            if right is not None:
                push(one, zero_d, right)
        remaining = -heap[0][0] if heap else None
        return ExactResult(
            self.best,
            optimal and not heap,
            self.nodes,
            self._bound_int(remaining),
            self.history,
            time.monotonic() - start,
        )

    def _floor(self, scaled: int) -> int:
        return scaled // self.scale

    def _bound_int(self, scaled: int | None) -> int:
        if scaled is None:
            return self.best_val
        return max(self.best_val, self._floor(scaled))


def solve_exact_bb(inst: Instance, reach: ReachabilityData, budget: float | None = None) -> ExactResult:
    """Branch-and-bound over served sets; ``optimal`` is False if the budget ran out."""
    return _BranchAndBound(inst, reach, budget, costs=False).run()


def solve_exact_with_costs(inst: Instance, reach: ReachabilityData, budget: float | None = None) -> ExactResult:
    return _BranchAndBound(inst, reach, budget, costs=True).run()
