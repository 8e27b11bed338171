"""Flow models of single-type scheduling.

Two network shapes are built over a :class:`~mrmd.preprocess.TypeView`:

* the reward network, where each demand is an arc ``(u_j, v_j)`` of cost
  ``-w_j`` and a minimum-cost flow of value ``m`` picks the best schedules
  for ``m`` units (:func:`solve_1r1d`);
* the fixed-service feasibility network, where demands are nodes with a
  capacity equal to their 0/1 service flag (:func:`build_ipmr_network`,
  :func:`check_full_feasibility`).

Both decode back into start-anchored demand sequences through
:func:`decompose_flow_to_paths`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .flow import FlowNetwork, FlowSolution, apply_node_capacities, solve_min_cost_flow
from .instance import Instance, Solution, assign_units
from .preprocess import ReachabilityData, TypeView

# (start location | previous demand index, next demand index) -> cost
ArcCost = Callable[[object, int], int]


@dataclass
class ScheduleNetwork:
    net: FlowNetwork
    sink: int
    start_node: dict[str, int] = field(default_factory=dict)
    demand_in: dict[int, int] = field(default_factory=dict)
    demand_out: dict[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class TypeSchedule:
    """Result of one single-type solve."""

    type_id: str
    feasible: bool
    served: frozenset[int] = frozenset()
    paths: tuple[tuple[str, tuple[int, ...]], ...] = ()
    reward: int = 0
    cost: int = 0

    @property
    def objective(self) -> int:
        return self.reward - self.cost


def decompose_flow_to_paths(flow: FlowSolution, sn: ScheduleNetwork) -> list[tuple[str, tuple[int, ...]]]:
    """Peel an integral flow into one demand sequence per used unit.

    Walks from each start node along arcs that still carry flow, lowest arc
    index first, recording a demand whenever its entry node is reached.  Units
    whose flow goes straight to the sink are idle and produce no path.
    Raises ``RuntimeError`` on non-integral or non-conserved flow.
    """
    if not flow.feasible:
        return []
    if any(not isinstance(f, int) for f in flow.flow):
        raise RuntimeError("flow is not integral")
    net = sn.net
    remaining = list(flow.flow)
    out_arcs: dict[int, list[int]] = {}
    for k, a in enumerate(net.arcs):
        if remaining[k]:
            out_arcs.setdefault(a.tail, []).append(k)
    in_node = {v: d for d, v in sn.demand_in.items()}

    def take(node: int) -> int | None:
        for k in out_arcs.get(node, ()):
            if remaining[k] > 0:
                remaining[k] -= 1
                return k
        return None

    paths = []
    for loc, b in sn.start_node.items():
        while True:
            k = take(b)
            if k is None:
                break
            seq = []
            node = net.arcs[k].head
            while node != sn.sink:
                if node in in_node:
                    seq.append(in_node[node])
                k = take(node)
                if k is None:
                    raise RuntimeError(f"flow not conserved at node {net.names[node]!r}")
                node = net.arcs[k].head
            if seq:
                paths.append((loc, tuple(seq)))
    for d, v in sn.demand_in.items():
        if any(remaining[k] for k in out_arcs.get(v, ())):
            raise RuntimeError(f"flow through demand {d} not reachable from any start")
    return paths


def build_reward_network(
    view: TypeView,
    weights: Mapping[int, int],
    forced: Iterable[int] = (),
    arc_cost: ArcCost | None = None,
) -> tuple[ScheduleNetwork, int]:
    """Single-type reward network; returns it with the bonus added to forced demands."""
    forced = set(forced)
    keep = [j for j in view.demands if j in forced or weights.get(j, 0) > 0]
    keep_set = set(keep)
    cost = arc_cost or (lambda prev, j: 0)

    in_cost = {j: 0 for j in keep}
    start_arcs = []
    for loc, count, reach in view.starts:
        for j in reach:
            if j in keep_set:
                c = cost(loc, j)
                start_arcs.append((loc, j, c))
                in_cost[j] = max(in_cost[j], c)
    pair_arcs = []
    for i in keep:
        for j in view.succ.get(i, ()):
            if j in keep_set:
                c = cost(i, j)
                pair_arcs.append((i, j, c))
                in_cost[j] = max(in_cost[j], c)
    bonus = 1 + sum(abs(weights.get(j, 0)) for j in keep) + sum(in_cost.values()) if forced else 0

    m = view.stock
    net = FlowNetwork()
    s = net.add_node("s", m)
    t = net.add_node("t", -m)
    sn = ScheduleNetwork(net, t)
    for loc, count, _ in view.starts:
        b = net.add_node(("b", loc))
        sn.start_node[loc] = b
        net.add_arc(s, b, count)
        net.add_arc(b, t, count)
    for j in keep:
        u = net.add_node(("u", j))
        v = net.add_node(("v", j))
        sn.demand_in[j] = u
        sn.demand_out[j] = v
        w = weights.get(j, 0) + (bonus if j in forced else 0)
        net.add_arc(u, v, 1, -w)
        net.add_arc(v, t, 1)
    for loc, j, c in start_arcs:
        net.add_arc(sn.start_node[loc], sn.demand_in[j], 1, c)
    for i, j, c in pair_arcs:
        net.add_arc(sn.demand_out[i], sn.demand_in[j], 1, c)
    return sn, bonus


def solve_1r1d(
    view: TypeView,
    weights: Mapping[int, int],
    forced: Iterable[int] = (),
    arc_cost: ArcCost | None = None,
) -> TypeSchedule:
    """Best schedules for the units of one type.

    Maximises the total weight of demands served minus travel costs, subject
    to serving every demand in ``forced``; ``feasible`` is False when the
    forced demands cannot all be served.  Demands of nonpositive weight that
    are not forced are left out (serving them never helps).
    """
    forced = frozenset(forced)
    sn, _ = build_reward_network(view, weights, forced, arc_cost)
    sol = solve_min_cost_flow(sn.net)
    if not sol.feasible:  # pragma: no cover - idle arcs make it always feasible
        return TypeSchedule(view.type_id, False)
    paths = decompose_flow_to_paths(sol, sn)
    served = frozenset(j for _, seq in paths for j in seq)
    if not forced <= served:
        return TypeSchedule(view.type_id, False)
    reward = sum(weights.get(j, 0) for j in served)
    travel = path_cost(paths, arc_cost) if arc_cost else 0
    return TypeSchedule(view.type_id, True, served, tuple(paths), reward, travel)


def path_cost(paths: Iterable[tuple[str, tuple[int, ...]]], arc_cost: ArcCost) -> int:
    total = 0
    for loc, seq in paths:
        prev: object = loc
        for j in seq:
            total += arc_cost(prev, j)
            prev = j
    return total


def build_ipmr_network(view: TypeView, served: Iterable[int]) -> ScheduleNetwork:
    """Fixed-service feasibility network for one type, node capacities still attached.

    Nodes are a super source, one node per start location, one per demand of
    the type and a sink.  Demand node ``i`` gets capacity ``y_i``: exactly
    one unit passes through a served demand, none through the others.
    """
    served = set(served)
    m = view.stock
    net = FlowNetwork()
    s_star = net.add_node("s*", m)
    t = net.add_node("t", -m)
    sn = ScheduleNetwork(net, t)
    net.add_arc(s_star, t, None)
    for loc, count, _ in view.starts:
        s = net.add_node(("s", loc))
        sn.start_node[loc] = s
        net.add_arc(s_star, s, count)
    for d in view.demands:
        node = net.add_node(("d", d))
        sn.demand_in[d] = node
        sn.demand_out[d] = node
        y = 1 if d in served else 0
        net.set_node_capacity(node, y, y)
    for d in view.demands:
        net.add_arc(sn.demand_out[d], t, 1)
    for loc, _, reach in view.starts:
        for d in reach:
            net.add_arc(sn.start_node[loc], sn.demand_in[d], 1)
    for i in view.demands:
        for j in view.succ.get(i, ()):
            net.add_arc(sn.demand_out[i], sn.demand_in[j], 1)
    return sn


def split_schedule_network(sn: ScheduleNetwork) -> ScheduleNetwork:
    """Apply the node-capacity transformation, keeping the role maps in sync."""
    split = apply_node_capacities(sn.net)
    out = ScheduleNetwork(split, sn.sink, dict(sn.start_node), dict(sn.demand_in))
    for d, node in sn.demand_in.items():
        out.demand_out[d] = split.split_of[node][1] if node in split.split_of else node
    return out


def solve_ipmr(view: TypeView, served: Iterable[int]) -> TypeSchedule:
    served = frozenset(served)
    sn = split_schedule_network(build_ipmr_network(view, served))
    sol = solve_min_cost_flow(sn.net)
    if not sol.feasible:
        return TypeSchedule(view.type_id, False)
    paths = decompose_flow_to_paths(sol, sn)
    return TypeSchedule(view.type_id, True, frozenset(j for _, seq in paths for j in seq), tuple(paths))


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    schedules: Mapping[str, TypeSchedule]
    solution: Solution | None = None

    def infeasible_types(self) -> list[str]:
        return [r for r, s in self.schedules.items() if not s.feasible]


def schedules_to_solution(
    inst: Instance, served: Iterable[int], schedules: Mapping[str, TypeSchedule], objective: int | None = None
) -> Solution:
    served = frozenset(served)
    ids = [d.id for d in inst.demands]
    paths = {
        r: [(loc, tuple(ids[j] for j in seq)) for loc, seq in sch.paths]
        for r, sch in schedules.items()
    }
    if objective is None:
        objective = sum(inst.demands[j].reward for j in served)
    return Solution(frozenset(ids[j] for j in served), assign_units(inst, paths), objective)


def check_full_feasibility(inst: Instance, reach: ReachabilityData) -> FeasibilityResult:
    """Can every demand be served?  One node-capacitated flow problem per type."""
    everything = set(range(len(inst.demands)))
    schedules = {r: solve_ipmr(reach.view(r), everything) for r in inst.type_ids}
    ok = all(s.feasible for s in schedules.values())
    sol = schedules_to_solution(inst, everything, schedules) if ok else None
    return FeasibilityResult(ok, schedules, sol)


def solve_1r1d_instance(inst: Instance, reach: ReachabilityData, type_id: str | None = None) -> Solution:
    """Optimal schedule for a single-type instance (or one type of a larger one)."""
    if type_id is None:
        if len(inst.types) != 1:
            raise ValueError("type_id required for instances with several resource types")
        type_id = inst.types[0].id
    view = reach.view(type_id)
    sch = solve_1r1d(view, {j: inst.demands[j].reward for j in view.demands})
    return schedules_to_solution(inst, sch.served, {type_id: sch}, sch.reward)
