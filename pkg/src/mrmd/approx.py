"""Approximation algorithms for instances whose resources share one start location.

* Algorithm A walks the types from fewest to most units, solving the
  single-type problem on the demands not yet claimed by a smaller type, and
  keeps the best iteration: an ``|R|``-approximation.
* Algorithms B and C group demands by their exact set of required types,
  colour the conflict graph of those sets, and keep the best colour class:
  a ``chi``-approximation for a proper colouring and an ``a/b``-approximation
  for an a:b-colouring.
* Algorithm E is an exact greedy for zero travel, one common start time and
  "one type or all types" requests; the grouped variant handles unit
  durations by running it once per start time.

Larger types reuse the winning schedule unit by unit.  Dropping demands a
type does not need from a replicated path keeps it feasible because travel
times satisfy the triangle inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .instance import Instance, PreconditionError, Solution, assign_units, empty_solution, shared_start_location
from .mcf import TypeSchedule, solve_1r1d
from .preprocess import ReachabilityData

Node = frozenset  # a conflict-graph node is a set of type ids


def _require_shared_start(inst: Instance) -> str:
    loc = shared_start_location(inst)
    if loc is None:
        raise PreconditionError("all resource units must start at one location")
    return loc


def stock_order(inst: Instance) -> list[str]:
    """Type ids sorted by unit count, instance order breaking ties."""
    tidx = inst.type_index
    return sorted(inst.type_ids, key=lambda r: (inst.stock(r), tidx[r]))


def _project(inst: Instance, paths, type_id: str):
    """Keep only the demands of each path that need ``type_id``; drop empty paths."""
    out = []
    for loc, seq in paths:
        kept = tuple(j for j in seq if type_id in inst.demands[j].requires)
        if kept:
            out.append((loc, kept))
    return out


def _build_solution(inst: Instance, per_type: Mapping[str, list], served, objective: int, certificate: str) -> Solution:
    ids = [d.id for d in inst.demands]
    paths = {r: [(loc, tuple(ids[j] for j in seq)) for loc, seq in ps] for r, ps in per_type.items()}
    return Solution(frozenset(ids[j] for j in served), assign_units(inst, paths), objective, certificate)


# -- Algorithm A ---------------------------------------------------------------


@dataclass(frozen=True)
class AIteration:
    type_id: str
    considered: frozenset[int]  # remaining demands that need this type
    schedule: TypeSchedule

    @property
    def value(self) -> int:
        return self.schedule.reward


def algorithm_a_iterations(inst: Instance, reach: ReachabilityData) -> list[AIteration]:
    _require_shared_start(inst)
    remaining = set(range(len(inst.demands)))
    out = []
    for r in stock_order(inst):
        view = reach.view(r).restricted(remaining)
        sch = solve_1r1d(view, {j: inst.demands[j].reward for j in view.demands})
        out.append(AIteration(r, frozenset(view.demands), sch))
        remaining.difference_update(view.demands)
    return out


def run_algorithm_a(inst: Instance, reach: ReachabilityData) -> Solution:
    """Best single-type schedule over the stock-sorted sweep, replicated to larger types."""
    iters = algorithm_a_iterations(inst, reach)
    cert = f">= OPT/{len(inst.types)}"
    if not iters:
        return empty_solution(inst).with_certificate(cert)
    best = 0
    for k in range(1, len(iters)):
        if iters[k].value > iters[best].value:
            best = k
    win = iters[best]
    per_type = {it.type_id: _project(inst, win.schedule.paths, it.type_id) for it in iters[best:]}
    return _build_solution(inst, per_type, win.schedule.served, win.value, cert)


# -- conflict graph and colourings ---------------------------------------------


@dataclass(frozen=True)
class ConflictGraph:
    nodes: tuple[Node, ...]
    edges: frozenset[tuple[int, int]]  # index pairs (u, v) with u < v
    buckets: Mapping[Node, tuple[int, ...]]

    def neighbors(self, k: int) -> set[int]:
        return {v if u == k else u for u, v in self.edges if k in (u, v)}

    def degree(self, k: int) -> int:
        return sum(1 for e in self.edges if k in e)

    def index(self, node) -> int:
        return self.nodes.index(frozenset(node))


def build_conflict_graph(inst: Instance) -> ConflictGraph:
    """One node per distinct requirement set; edges join intersecting sets."""
    tidx = inst.type_index
    buckets: dict[Node, list[int]] = {}
    for j, d in enumerate(inst.demands):
        buckets.setdefault(frozenset(d.requires), []).append(j)
    nodes = tuple(sorted(buckets, key=lambda v: sorted(tidx[r] for r in v)))
    edges = frozenset(
        (a, b) for a in range(len(nodes)) for b in range(a + 1, len(nodes)) if nodes[a] & nodes[b]
    )
    return ConflictGraph(nodes, edges, {v: tuple(buckets[v]) for v in nodes})


@dataclass(frozen=True)
class Coloring:
    """``b`` colours out of ``1..a`` per node; ``b == 1`` is an ordinary colouring."""

    a: int
    b: int
    assignment: Mapping[Node, frozenset[int]] = field(default_factory=dict)

    @classmethod
    def proper(cls, colors: Mapping) -> "Coloring":
        assign = {frozenset(v): frozenset({int(c)}) for v, c in colors.items()}
        a = max((c for s in assign.values() for c in s), default=1)
        return cls(a, 1, assign)

    @property
    def ratio(self) -> float:
        return self.a / self.b

    def check(self, graph: ConflictGraph) -> None:
        """Raise ``PreconditionError`` unless this is a valid a:b-colouring of ``graph``."""
        if self.a < 1 or not (1 <= self.b <= self.a):
            raise PreconditionError(f"need 1 <= b <= a, got a={self.a}, b={self.b}")
        palette = set(range(1, self.a + 1))
        for v in graph.nodes:
            cs = self.assignment.get(v)
            if cs is None:
                raise PreconditionError(f"node {sorted(v)} has no colours")
            if len(cs) != self.b or not cs <= palette:
                raise PreconditionError(f"node {sorted(v)} needs {self.b} colours from 1..{self.a}, got {sorted(cs)}")
        for u, v in sorted(graph.edges):
            if self.assignment[graph.nodes[u]] & self.assignment[graph.nodes[v]]:
                raise PreconditionError(f"adjacent nodes {sorted(graph.nodes[u])} and {sorted(graph.nodes[v])} share a colour")


def greedy_color(graph: ConflictGraph) -> Coloring:
    """Largest-degree-first greedy; each node takes the smallest colour free among its neighbours."""
    order = sorted(range(len(graph.nodes)), key=lambda k: (-graph.degree(k), k))
    color: dict[int, int] = {}
    for k in order:
        taken = {color[n] for n in graph.neighbors(k) if n in color}
        c = 1
        while c in taken:
            c += 1
        color[k] = c
    return Coloring.proper({graph.nodes[k]: c for k, c in color.items()})


# -- Algorithms B and C --------------------------------------------------------


def _representative(inst: Instance, node: Node) -> str:
    tidx = inst.type_index
    return min(node, key=lambda r: (inst.stock(r), tidx[r]))


def _certificate(a: int, b: int) -> str:
    return f">= OPT/{a}" if b == 1 else f">= {b}*OPT/{a}"


def _run_colored(inst: Instance, reach: ReachabilityData, graph: ConflictGraph, coloring: Coloring) -> Solution:
    _require_shared_start(inst)
    coloring.check(graph)
    cert = _certificate(coloring.a, coloring.b)
    solved: dict[Node, TypeSchedule] = {}

    def bucket(v: Node) -> TypeSchedule:
        if v not in solved:
            rep = _representative(inst, v)
            view = reach.view(rep).restricted(graph.buckets[v])
            solved[v] = solve_1r1d(view, {j: inst.demands[j].reward for j in view.demands})
        return solved[v]

    best_color, best_val = None, -1
    for c in range(1, coloring.a + 1):
        members = [v for v in graph.nodes if c in coloring.assignment[v]]
        val = sum(bucket(v).reward for v in members)
        if val > best_val:
            best_color, best_val = c, val
    if best_color is None:
        return empty_solution(inst).with_certificate(cert)
    per_type: dict[str, list] = {}
    served: set[int] = set()
    for v in graph.nodes:
        if best_color in coloring.assignment[v]:
            sch = bucket(v)
            served |= sch.served
            for r in v:
                per_type[r] = list(sch.paths)
    return _build_solution(inst, per_type, served, best_val, cert)


def run_algorithm_b(inst: Instance, reach: ReachabilityData, coloring: Coloring | None = None) -> Solution:
    """Best colour class of a proper colouring (greedy when none is given)."""
    graph = build_conflict_graph(inst)
    if coloring is None:
        coloring = greedy_color(graph)
    if coloring.b != 1:
        raise PreconditionError("algorithm B needs a proper colouring (b = 1)")
    return _run_colored(inst, reach, graph, coloring)


def run_algorithm_c(inst: Instance, reach: ReachabilityData, coloring: Coloring) -> Solution:
    """Best colour class of an a:b-colouring of the conflict graph."""
    return _run_colored(inst, reach, build_conflict_graph(inst), coloring)


# -- Algorithm E ---------------------------------------------------------------


def _check_one_or_all(inst: Instance) -> None:
    everything = frozenset(inst.type_ids)
    for d in inst.demands:
        if len(d.requires) != 1 and d.requires != everything:
            raise PreconditionError(f"demand {d.id} needs one type or all types")
    if inst.travel_matrix.any():
        raise PreconditionError("travel times must all be zero")


def _greedy_one_or_all(inst: Instance, group: list[int]) -> list[int]:
    """Indices served by the greedy merge within one start-time group."""
    all_types = frozenset(inst.type_ids)
    by_reward = sorted(group, key=lambda j: (-inst.demands[j].reward, j))
    if len(all_types) > 1:
        d0 = [j for j in by_reward if inst.demands[j].requires == all_types]
    else:
        d0 = []
    lists = {r: [j for j in by_reward if inst.demands[j].requires == {r} and j not in d0] for r in inst.type_ids}
    m = min(inst.stock(r) for r in inst.type_ids)
    served: list[int] = []
    for r in inst.type_ids:
        surplus = inst.stock(r) - m
        served += lists[r][:surplus]
        lists[r] = lists[r][surplus:]
    for _ in range(m):
        head0 = inst.demands[d0[0]].reward if d0 else 0
        heads = sum(inst.demands[ls[0]].reward for ls in lists.values() if ls)
        if heads <= head0:
            if d0:
                served.append(d0.pop(0))
        else:
            for ls in lists.values():
                if ls:
                    served.append(ls.pop(0))
    return served


def _units_solution(inst: Instance, rounds: list[list[int]], objective: int) -> Solution:
    """Paths from per-round served lists; each round hands out units from 0 upward."""
    per_type: dict[str, list[list[int]]] = {
        r: [[] for _ in range(inst.stock(r))] for r in inst.type_ids
    }
    served: list[int] = []
    for group in rounds:
        nxt = {r: 0 for r in inst.type_ids}
        for j in group:
            for r in sorted(inst.demands[j].requires):
                per_type[r][nxt[r]].append(j)
                nxt[r] += 1
        served += group
    out = {}
    for t in inst.types:
        locs = [loc for loc, count in t.starts for _ in range(count)]
        out[t.id] = [(locs[u], tuple(seq)) for u, seq in enumerate(per_type[t.id]) if seq]
    return _build_solution(inst, out, served, objective, "optimal")


def run_algorithm_e(inst: Instance) -> Solution:
    """Optimal when travel is zero, every demand starts together and each unit serves one demand."""
    _check_one_or_all(inst)
    if len({d.start for d in inst.demands}) > 1:
        raise PreconditionError("all demands must share one start time")
    served = _greedy_one_or_all(inst, list(range(len(inst.demands))))
    return _units_solution(inst, [served], sum(inst.demands[j].reward for j in served))


def run_algorithm_e_grouped(inst: Instance) -> Solution:
    """Unit durations: demands at different start times never compete, so solve each time separately."""
    _check_one_or_all(inst)
    if any(d.duration != 1 for d in inst.demands):
        raise PreconditionError("all durations must be 1")
    groups: dict[int, list[int]] = {}
    for j, d in enumerate(inst.demands):
        groups.setdefault(d.start, []).append(j)
    rounds = [_greedy_one_or_all(inst, groups[t]) for t in sorted(groups)]
    total = sum(inst.demands[j].reward for g in rounds for j in g)
    return _units_solution(inst, rounds, total)
