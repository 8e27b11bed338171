"""Integral min-cost flow by successive shortest paths.

Lower bounds are eliminated up front, a super source/sink absorbs the
resulting excesses, and every augmentation runs Dijkstra on reduced costs.
Initial potentials come from one topological pass when the residual graph is
acyclic (every network built in this package is), otherwise from
Bellman-Ford.  Networks with negative-cost cycles are rejected.

All data must be integral; flows come back integral.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass
class Arc:
    tail: int
    head: int
    lower: int = 0
    upper: int | None = None  # None = uncapacitated
    cost: int = 0


@dataclass
class FlowNetwork:
    supply: list[int] = field(default_factory=list)
    names: list[object] = field(default_factory=list)
    arcs: list[Arc] = field(default_factory=list)
    node_bounds: dict[int, tuple[int, int | None]] = field(default_factory=dict)
    # filled in by apply_node_capacities
    split_of: dict[int, tuple[int, int, int]] = field(default_factory=dict)

    @property
    def num_nodes(self) -> int:
        return len(self.supply)

    def add_node(self, name: object = None, supply: int = 0) -> int:
        self.supply.append(supply)
        self.names.append(name)
        return len(self.supply) - 1

    def add_arc(self, tail: int, head: int, upper: int | None = None, cost: int = 0, lower: int = 0) -> int:
        self.arcs.append(Arc(tail, head, lower, upper, cost))
        return len(self.arcs) - 1

    def set_node_capacity(self, node: int, lower: int, upper: int | None = ...) -> None:
        """Bound the flow through ``node``; a single value ``v`` means exactly ``v``."""
        self.node_bounds[node] = (lower, lower if upper is ... else upper)

    def validate(self) -> None:
        if sum(self.supply) != 0:
            raise ValueError(f"supplies sum to {sum(self.supply)}, expected 0")
        for k, a in enumerate(self.arcs):
            if a.upper is not None and a.lower > a.upper:
                raise ValueError(f"arc {k}: lower {a.lower} > upper {a.upper}")
            if not (0 <= a.tail < self.num_nodes and 0 <= a.head < self.num_nodes):
                raise ValueError(f"arc {k}: endpoint out of range")


@dataclass(frozen=True)
class FlowSolution:
    status: str
    flow: tuple[int, ...] = ()
    cost: int = 0

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL


def apply_node_capacities(net: FlowNetwork) -> FlowNetwork:
    """Replace node capacities by split nodes joined by a bounded arc.

    Node ``i`` keeps its index as the entry copy ``i'``; a new exit copy
    ``i''`` is appended.  Arcs leaving a capacitated node now leave ``i''``,
    arcs entering it still enter ``i'``, and ``(i', i'')`` carries the node's
    bounds at cost 0.  Original arcs keep their indices; split arcs follow.
    """
    out = FlowNetwork(list(net.supply), list(net.names))
    exit_of = {}
    for node in sorted(net.node_bounds):
        exit_of[node] = out.add_node(("out", net.names[node]), 0)
    for a in net.arcs:
        tail = exit_of.get(a.tail, a.tail)
        out.add_arc(tail, a.head, a.upper, a.cost, a.lower)
    for node in sorted(net.node_bounds):
        lo, hi = net.node_bounds[node]
        k = out.add_arc(node, exit_of[node], hi, 0, lo)
        out.split_of[node] = (node, exit_of[node], k)
    return out


def solve_min_cost_flow(net: FlowNetwork) -> FlowSolution:
    """Minimum-cost feasible integral flow, or ``INFEASIBLE``."""
    net.validate()
    if net.node_bounds:
        split = apply_node_capacities(net)
        sol = solve_min_cost_flow(split)
        if not sol.feasible:
            return sol
        return FlowSolution(OPTIMAL, sol.flow[: len(net.arcs)], sol.cost)
    return _successive_shortest_paths(net)


def _successive_shortest_paths(net: FlowNetwork) -> FlowSolution:
    n = net.num_nodes
    excess = list(net.supply)
    for a in net.arcs:
        excess[a.tail] -= a.lower
        excess[a.head] += a.lower
    required = sum(e for e in excess if e > 0)
    big = required + 1

    src, snk = n, n + 1
    size = n + 2
    to: list[int] = []
    cap: list[int] = []
    cost: list[int] = []
    adj: list[list[int]] = [[] for _ in range(size)]

    def add(u: int, v: int, c: int, w: int) -> int:
        e = len(to)
        to.extend((v, u))
        cap.extend((c, 0))
        cost.extend((w, -w))
        adj[u].append(e)
        adj[v].append(e + 1)
        return e

    arc_edge = []
    for a in net.arcs:
        c = big if a.upper is None else a.upper - a.lower
        arc_edge.append(add(a.tail, a.head, c, a.cost))
    for v in range(n):
        if excess[v] > 0:
            add(src, v, excess[v], 0)
        elif excess[v] < 0:
            add(v, snk, -excess[v], 0)

    pot = _initial_potentials(size, to, cap, cost, adj)
    inf = float("inf")
    pushed = 0
    while pushed < required:
        dist = [inf] * size
        via = [-1] * size
        dist[src] = 0
        heap = [(0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            pu = pot[u]
            for e in adj[u]:
                if cap[e] > 0:
                    v = to[e]
                    nd = d + cost[e] + pu - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        via[v] = e
                        heapq.heappush(heap, (nd, v))
        if dist[snk] == inf:
            return FlowSolution(INFEASIBLE)
        dt = dist[snk]
        for v in range(size):
            pot[v] += dist[v] if dist[v] < dt else dt
        delta = required - pushed
        v = snk
        while v != src:
            e = via[v]
            delta = min(delta, cap[e])
            v = to[e ^ 1]
        v = snk
        while v != src:
            e = via[v]
            cap[e] -= delta
            cap[e ^ 1] += delta
            v = to[e ^ 1]
        pushed += delta

    flow = tuple(a.lower + cap[e ^ 1] for a, e in zip(net.arcs, arc_edge))
    total = sum(f * a.cost for f, a in zip(flow, net.arcs))
    return FlowSolution(OPTIMAL, flow, total)


def _initial_potentials(size, to, cap, cost, adj) -> list[int]:
    if all(cost[e] >= 0 for e in range(len(to)) if cap[e] > 0):
        return [0] * size
    indeg = [0] * size
    for e in range(len(to)):
        if cap[e] > 0:
            indeg[to[e]] += 1
    order = [v for v in range(size) if indeg[v] == 0]
    queue = deque(order)
    while queue:
        u = queue.popleft()
        for e in adj[u]:
            if cap[e] > 0:
                v = to[e]
                indeg[v] -= 1
                if indeg[v] == 0:
                    order.append(v)
                    queue.append(v)
    dist = [0] * size
    if len(order) == size:
        for u in order:
            for e in adj[u]:
                if cap[e] > 0 and dist[u] + cost[e] < dist[to[e]]:
                    dist[to[e]] = dist[u] + cost[e]
        return dist
    # cyclic residual graph: queue-based Bellman-Ford from a virtual root
    in_queue = [True] * size
    count = [0] * size
    queue = deque(range(size))
    while queue:
        u = queue.popleft()
        in_queue[u] = False
        for e in adj[u]:
            if cap[e] > 0 and dist[u] + cost[e] < dist[to[e]]:
                v = to[e]
                dist[v] = dist[u] + cost[e]
                if not in_queue[v]:
                    count[v] += 1
                    if count[v] > size:
                        raise ValueError("network contains a negative-cost cycle")
                    in_queue[v] = True
                    queue.append(v)
    return dist


def to_dimacs(net: FlowNetwork) -> str:
    """DIMACS min-cost-flow text (1-indexed nodes); node capacities are split first."""
    if net.node_bounds:
        net = apply_node_capacities(net)
    big = sum(s for s in net.supply if s > 0) + sum(a.lower for a in net.arcs) + 1
    lines = [f"p min {net.num_nodes} {len(net.arcs)}"]
    for v, s in enumerate(net.supply):
        if s:
            lines.append(f"n {v + 1} {s}")
    for a in net.arcs:
        up = big if a.upper is None else a.upper
        lines.append(f"a {a.tail + 1} {a.head + 1} {a.lower} {up} {a.cost}")
    return "\n".join(lines) + "\n"
