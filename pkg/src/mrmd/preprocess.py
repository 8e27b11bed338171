"""Reachability preprocessing: which demand may follow which, and from where.

``A[i, j] = 1`` when a unit that finishes demand ``i`` can travel to ``j`` in
time and the two demands share a required type; ``B[s, d] = 1`` when a unit
starting at ``s`` can reach ``d`` on time and some type starting at ``s`` is
required by ``d``.  Matrices are kept as adjacency lists; dense views are
available for inspection and tests.

Solvers never look at the shared matrices directly.  They consume one
:class:`TypeView` per resource type, which makes the origin/destination
variant (one ``A`` per type) a drop-in replacement.
"""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Mapping

import numpy as np

from .instance import Instance, type_masks


@dataclass(frozen=True)
class TypeView:
    """Single-type subproblem: demands ``D^r``, restricted arcs and stocks."""

    type_id: str
    demands: tuple[int, ...]
    succ: Mapping[int, tuple[int, ...]]
    starts: tuple[tuple[str, int, tuple[int, ...]], ...]

    @property
    def stock(self) -> int:
        return sum(count for _, count, _ in self.starts)

    def arc_count(self) -> int:
        return sum(len(v) for v in self.succ.values())

    def restricted(self, keep) -> "TypeView":
        """View over ``demands & keep`` with arcs and start rows cut accordingly."""
        keep = set(keep)
        dem = tuple(i for i in self.demands if i in keep)
        succ = {i: tuple(j for j in self.succ.get(i, ()) if j in keep) for i in dem}
        starts = tuple((loc, c, tuple(j for j in reach if j in keep)) for loc, c, reach in self.starts)
        return TypeView(self.type_id, dem, succ, starts)

    def with_stocks(self, counts: Mapping[str, int]) -> "TypeView":
        starts = tuple((loc, counts.get(loc, c), reach) for loc, c, reach in self.starts)
        return TypeView(self.type_id, self.demands, self.succ, starts)


@dataclass(frozen=True)
class ReachabilityData:
    n: int
    succ: tuple[tuple[int, ...], ...]
    start_locations: tuple[str, ...]
    start_succ: tuple[tuple[int, ...], ...]
    views: Mapping[str, TypeView]

    def a(self, i: int, j: int) -> bool:
        return j in self.succ[i]

    def b(self, loc: str, d: int) -> bool:
        return d in self.start_succ[self.start_locations.index(loc)]

    def dense_a(self) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.int8)
        for i, js in enumerate(self.succ):
            out[i, list(js)] = 1
        return out

    def dense_b(self) -> np.ndarray:
        out = np.zeros((len(self.start_locations), self.n), dtype=np.int8)
        for s, ds in enumerate(self.start_succ):
            out[s, list(ds)] = 1
        return out

    def view(self, type_id: str) -> TypeView:
        return self.views[type_id]

    def is_arc(self, type_id: str, prev: int | str, nxt: int) -> bool:
        """Per-type arc test; ``prev`` is a start location id or a demand index."""
        v = self.views[type_id]
        if isinstance(prev, str):
            return any(loc == prev and nxt in reach for loc, _, reach in v.starts)
        return nxt in v.succ.get(prev, ())


@dataclass(frozen=True)
class OdReachabilityData(ReachabilityData):
    """Origin/destination variant: arcs differ per type, so no shared ``A``."""

    def a(self, i: int, j: int) -> bool:  # pragma: no cover - guarded API
        raise TypeError("origin/destination data has one A matrix per type; use is_arc(type, i, j)")


def _demand_travel(inst: Instance) -> np.ndarray:
    li = inst.location_index
    idx = np.array([li[d.location] for d in inst.demands], dtype=np.int64)
    return inst.travel_matrix[np.ix_(idx, idx)]


def _adjacency(mask: np.ndarray) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in mask)


def reachability_matrices(inst: Instance) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Dense boolean ``A`` and ``B`` straight from their defining inequalities."""
    n = len(inst.demands)
    tau = np.array([d.start for d in inst.demands], dtype=np.int64)
    end = np.array([d.end for d in inst.demands], dtype=np.int64)
    masks = type_masks(inst)
    if n:
        a = (end[:, None] + _demand_travel(inst) <= tau[None, :]) & ((masks[:, None] & masks[None, :]) != 0)
    else:
        a = np.zeros((0, 0), dtype=bool)

    starts = inst.start_locations()
    li = inst.location_index
    tidx = inst.type_index
    start_mask = np.zeros(len(starts), dtype=np.int64)
    for t in inst.types:
        for loc, _ in t.starts:
            start_mask[starts.index(loc)] |= 1 << tidx[t.id]
    if n and starts:
        sidx = np.array([li[s] for s in starts])
        didx = np.array([li[d.location] for d in inst.demands])
        f_sd = inst.travel_matrix[np.ix_(sidx, didx)]
        b = (f_sd <= tau[None, :]) & ((start_mask[:, None] & masks[None, :]) != 0)
    else:
        b = np.zeros((len(starts), n), dtype=bool)
    return a, b, starts


def _type_views(inst: Instance, succ_for, start_reach_for) -> dict[str, TypeView]:
    views = {}
    for t in inst.types:
        dem = tuple(k for k, d in enumerate(inst.demands) if t.id in d.requires)
        succ = {i: succ_for(t.id, i) for i in dem}
        starts = tuple((loc, count, start_reach_for(t.id, loc)) for loc, count in t.starts)
        views[t.id] = TypeView(t.id, dem, succ, starts)
    return views


def assert_acyclic(succ) -> list[int]:
    """Topological order of the demand graph; raises ``ValueError`` on a cycle."""
    ts = TopologicalSorter({i: () for i in range(len(succ))})
    for i, js in enumerate(succ):
        for j in js:
            ts.add(j, i)
    try:
        return list(ts.static_order())
    except CycleError as exc:
        raise ValueError(f"reachability graph has a cycle: {exc.args[1]}") from exc


def build_reachability(inst: Instance) -> ReachabilityData:
    a, b, starts = reachability_matrices(inst)
    succ = _adjacency(a)
    start_succ = _adjacency(b)
    assert_acyclic(succ)
    req = [d.requires for d in inst.demands]

    def succ_for(r, i):
        return tuple(j for j in succ[i] if r in req[j])

    def start_reach_for(r, loc):
        return tuple(j for j in start_succ[starts.index(loc)] if r in req[j])

    return ReachabilityData(len(inst.demands), succ, starts, start_succ, _type_views(inst, succ_for, start_reach_for))


def restrict_to_type(reach: ReachabilityData, inst: Instance, type_id: str) -> TypeView:
    if type_id not in inst.type_index:
        raise KeyError(f"unknown resource type {type_id!r}")
    return reach.views[type_id]


OdPairs = Mapping[tuple[str, str], tuple[str, str]]


def build_od_reachability(inst: Instance, od: OdPairs) -> OdReachabilityData:
    """Per-type reachability when each (demand, type) has an origin and destination.

    ``od[(demand_id, type_id)] = (origin, destination)``: a unit of that type
    serves at the origin, must then visit the destination, and only then
    moves on to the next demand's origin.
    """
    missing = [(d.id, r) for d in inst.demands for r in sorted(d.requires) if (d.id, r) not in od]
    if missing:
        raise KeyError(f"missing origin/destination pair for {missing[:5]}")
    li = inst.location_index
    f = inst.travel_matrix
    demands = inst.demands
    n = len(demands)
    starts = inst.start_locations()
    per_type_succ: dict[str, dict[int, tuple[int, ...]]] = {}
    per_type_start: dict[str, dict[str, tuple[int, ...]]] = {}
    union_succ: list[set[int]] = [set() for _ in range(n)]
    union_start: dict[str, set[int]] = {s: set() for s in starts}
    for t in inst.types:
        r = t.id
        dem = [k for k, d in enumerate(demands) if r in d.requires]
        orig = np.array([li[od[(demands[k].id, r)][0]] for k in dem], dtype=np.int64)
        dest = np.array([li[od[(demands[k].id, r)][1]] for k in dem], dtype=np.int64)
        end = np.array([demands[k].end for k in dem], dtype=np.int64)
        tau = np.array([demands[k].start for k in dem], dtype=np.int64)
        if dem:
            ready = end + f[orig, dest]
            ok = ready[:, None] + f[np.ix_(dest, orig)] <= tau[None, :]
        else:
            ok = np.zeros((0, 0), dtype=bool)
        succ = {}
        for a_pos, i in enumerate(dem):
            js = tuple(dem[b_pos] for b_pos in np.flatnonzero(ok[a_pos]))
            succ[i] = js
            union_succ[i].update(js)
        per_type_succ[r] = succ
        per_type_start[r] = {}
        for loc, _ in t.starts:
            s = li[loc]
            reach = tuple(k for pos, k in enumerate(dem) if f[s, orig[pos]] <= tau[pos])
            per_type_start[r][loc] = reach
            union_start[loc].update(reach)
    succ_all = tuple(tuple(sorted(s)) for s in union_succ)
    assert_acyclic(succ_all)
    views = _type_views(inst, lambda r, i: per_type_succ[r][i], lambda r, loc: per_type_start[r][loc])
    return OdReachabilityData(
        n, succ_all, starts, tuple(tuple(sorted(union_start[s])) for s in starts), views
    )


def dump_coordinate_lists(reach: ReachabilityData, inst: Instance) -> tuple[str, str]:
    """A and B as text, one ``i j`` pair per line (demand ids; start location ids for B)."""
    ids = [d.id for d in inst.demands]
    a_lines = [f"{ids[i]} {ids[j]}" for i, js in enumerate(reach.succ) for j in js]
    b_lines = [f"{s} {ids[d]}" for s, ds in zip(reach.start_locations, reach.start_succ) for d in ds]
    return "\n".join(a_lines) + "\n", "\n".join(b_lines) + "\n"
