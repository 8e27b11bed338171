"""Problem data model for multi-resource allocation with subset demand requests.

An :class:`Instance` holds demands (each needing one unit of every resource
type in a subset, at a fixed time, place and duration), resource types with
their starting stocks, and an integer travel metric.  Instances are plain
frozen dataclasses; :func:`validate_instance` reports every broken invariant
as data rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

GRID_L1 = "grid_l1"
MATRIX = "matrix"


class InstanceError(ValueError):
    """Base class for instance parsing and validation failures."""


class InstanceValidationError(InstanceError):
    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:10])
        more = f" (+{len(self.violations) - 10} more)" if len(self.violations) > 10 else ""
        super().__init__(f"invalid instance: {lines}{more}")


class PreconditionError(ValueError):
    """A solver was called on an instance outside its guaranteed class."""


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    detail: str = ""

    def __str__(self) -> str:
        tail = f": {self.detail}" if self.detail else ""
        return f"{self.entity} [{self.rule}]{tail}"


@dataclass(frozen=True)
class Location:
    id: str
    x: int | None = None
    y: int | None = None

    @property
    def coords(self) -> tuple[int, int] | None:
        if self.x is None or self.y is None:
            return None
        return (self.x, self.y)


@dataclass(frozen=True)
class Demand:
    id: str
    location: str
    start: int
    duration: int
    reward: int
    requires: frozenset[str]

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True)
class ResourceTypeSpec:
    id: str
    starts: tuple[tuple[str, int], ...]

    @property
    def total(self) -> int:
        return sum(count for _, count in self.starts)


@dataclass(frozen=True)
class TravelMetric:
    mode: str = GRID_L1
    matrix: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class Instance:
    locations: tuple[Location, ...]
    demands: tuple[Demand, ...]
    types: tuple[ResourceTypeSpec, ...]
    travel: TravelMetric = field(default_factory=TravelMetric)
    costs: tuple[tuple[int, ...], ...] | None = None
    grid: tuple[int, int] | None = None

    # -- lookups -------------------------------------------------------------

    @cached_property
    def location_index(self) -> dict[str, int]:
        return {loc.id: k for k, loc in enumerate(self.locations)}

    @cached_property
    def demand_index(self) -> dict[str, int]:
        return {d.id: k for k, d in enumerate(self.demands)}

    @cached_property
    def type_index(self) -> dict[str, int]:
        return {t.id: k for k, t in enumerate(self.types)}

    def type(self, type_id: str) -> ResourceTypeSpec:
        return self.types[self.type_index[type_id]]

    @property
    def type_ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.types)

    @property
    def total_reward(self) -> int:
        return sum(d.reward for d in self.demands)

    def stock(self, type_id: str) -> int:
        return self.type(type_id).total

    # -- metrics -------------------------------------------------------------

    @cached_property
    def travel_matrix(self) -> np.ndarray:
        """Dense integer travel-time matrix over ``locations``."""
        n = len(self.locations)
        if self.travel.mode == MATRIX:
            return np.asarray(self.travel.matrix, dtype=np.int64).reshape(n, n)
        xy = np.array([[loc.x, loc.y] for loc in self.locations], dtype=np.int64).reshape(n, 2)
        return np.abs(xy[:, None, :] - xy[None, :, :]).sum(axis=2)

    @cached_property
    def cost_matrix(self) -> np.ndarray:
        """Travel-cost matrix; falls back to travel times when no costs are given."""
        if self.costs is None:
            return self.travel_matrix
        n = len(self.locations)
        return np.asarray(self.costs, dtype=np.int64).reshape(n, n)

    def travel_time(self, a: str, b: str) -> int:
        idx = self.location_index
        return int(self.travel_matrix[idx[a], idx[b]])

    def travel_cost(self, a: str, b: str) -> int:
        idx = self.location_index
        return int(self.cost_matrix[idx[a], idx[b]])

    # -- derived instances ---------------------------------------------------

    def with_stocks(self, stocks: dict[tuple[str, str], int]) -> "Instance":
        """Copy with the per-(type, location) counts replaced by ``stocks``.

        Locations absent from ``stocks`` keep their count; new pairs are added.
        """
        types = []
        for t in self.types:
            counts = dict(t.starts)
            for (tid, loc), c in stocks.items():
                if tid == t.id:
                    counts[loc] = c
            types.append(ResourceTypeSpec(t.id, tuple((loc, c) for loc, c in counts.items() if c > 0)))
        return Instance(self.locations, self.demands, tuple(types), self.travel, self.costs, self.grid)

    def with_demands(self, demands: Iterable[Demand]) -> "Instance":
        return Instance(self.locations, tuple(demands), self.types, self.travel, self.costs, self.grid)

    def start_locations(self) -> tuple[str, ...]:
        """Distinct starting locations over all types, in first-seen order."""
        seen: dict[str, None] = {}
        for t in self.types:
            for loc, _ in t.starts:
                seen.setdefault(loc, None)
        return tuple(seen)


@dataclass(frozen=True)
class PathRecord:
    type: str
    unit: int
    start_location: str
    demands: tuple[str, ...] = ()


@dataclass(frozen=True)
class Solution:
    served: frozenset[str]
    paths: tuple[PathRecord, ...]
    objective: int
    certificate: str | None = None

    def paths_of(self, type_id: str) -> list[PathRecord]:
        return [p for p in self.paths if p.type == type_id]

    def with_certificate(self, certificate: str | None) -> "Solution":
        return Solution(self.served, self.paths, self.objective, certificate)


def empty_solution(inst: Instance) -> Solution:
    return Solution(frozenset(), assign_units(inst, {}), 0)


def assign_units(inst: Instance, paths: dict[str, list[tuple[str, tuple[str, ...]]]]) -> tuple[PathRecord, ...]:
    """Map start-anchored demand sequences onto numbered resource units.

    ``paths`` maps a type id to ``(start_location, demand_ids)`` pairs.  Every
    unit of every type gets a record; idle units carry an empty sequence.
    Raises ``ValueError`` if a location is asked for more paths than it has
    units.
    """
    records = []
    for t in inst.types:
        by_loc: dict[str, list[tuple[str, ...]]] = {}
        for loc, seq in paths.get(t.id, ()):
            by_loc.setdefault(loc, []).append(tuple(seq))
        unit = 0
        for loc, count in t.starts:
            seqs = by_loc.pop(loc, [])
            if len(seqs) > count:
                raise ValueError(f"type {t.id}: {len(seqs)} paths from {loc} but only {count} units")
            seqs = seqs + [()] * (count - len(seqs))
            for seq in seqs:
                records.append(PathRecord(t.id, unit, loc, seq))
                unit += 1
        if by_loc:
            raise ValueError(f"type {t.id}: paths from non-start locations {sorted(by_loc)}")
    return tuple(records)


# -- validation ----------------------------------------------------------------


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _matrix_violations(name: str, mat, n: int, loc_ids: Sequence[str], max_triangles: int = 20) -> list[Violation]:
    out: list[Violation] = []
    if mat is None:
        return [Violation(name, "matrix-missing", "explicit matrix mode needs a matrix")]
    if len(mat) != n or any(len(row) != n for row in mat):
        return [Violation(name, "matrix-shape", f"expected {n}x{n}")]
    if not all(_is_int(v) for row in mat for v in row):
        return [Violation(name, "integrality", "entries must be integers")]
    f = np.asarray(mat, dtype=np.int64)
    for a, b in zip(*np.nonzero(f < 0)):
        out.append(Violation(name, "nonnegative", f"({loc_ids[a]},{loc_ids[b]}) = {f[a, b]}"))
    for a in np.nonzero(np.diag(f) != 0)[0]:
        out.append(Violation(name, "zero-diagonal", f"({loc_ids[a]},{loc_ids[a]}) = {f[a, a]}"))
    found = 0
    for mid in range(n):
        via = f[:, mid, None] + f[None, mid, :]
        bad = np.argwhere(f > via)
        for a, c in bad:
            out.append(Violation(
                name, "triangle",
                f"({loc_ids[a]},{loc_ids[mid]},{loc_ids[c]}): {f[a, c]} > {f[a, mid]} + {f[mid, c]}",
            ))
            found += 1
            if found >= max_triangles:
                return out
    return out


def validate_instance(inst: Instance) -> list[Violation]:
    """Return every invariant violation; an empty list means the instance is valid."""
    out: list[Violation] = []

    def dupes(kind: str, ids: Iterable[str]) -> None:
        seen = set()
        for i in ids:
            if i in seen:
                out.append(Violation(f"{kind} {i}", "unique-id", "duplicate id"))
            seen.add(i)

    dupes("location", (loc.id for loc in inst.locations))
    dupes("demand", (d.id for d in inst.demands))
    dupes("type", (t.id for t in inst.types))

    loc_ids = {loc.id for loc in inst.locations}
    type_ids = {t.id for t in inst.types}

    if inst.travel.mode not in (GRID_L1, MATRIX):
        out.append(Violation("travel", "mode", f"unknown mode {inst.travel.mode!r}"))
    for loc in inst.locations:
        if loc.coords is None:
            if inst.travel.mode == GRID_L1:
                out.append(Violation(f"location {loc.id}", "coords", "grid_l1 travel needs coordinates"))
            continue
        if not (_is_int(loc.x) and _is_int(loc.y)):
            out.append(Violation(f"location {loc.id}", "integrality", "coordinates must be integers"))
        elif inst.grid is not None:
            w, h = inst.grid
            if not (0 <= loc.x < w and 0 <= loc.y < h):
                out.append(Violation(f"location {loc.id}", "grid-bounds", f"({loc.x},{loc.y}) outside {w}x{h}"))

    n = len(inst.locations)
    ordered = [loc.id for loc in inst.locations]
    if inst.travel.mode == MATRIX:
        out.extend(_matrix_violations("travel.f", inst.travel.matrix, n, ordered))
    if inst.costs is not None:
        out.extend(_matrix_violations("travel.c", inst.costs, n, ordered))

    for d in inst.demands:
        ent = f"demand {d.id}"
        if d.location not in loc_ids:
            out.append(Violation(ent, "location-ref", f"unknown location {d.location!r}"))
        for name in ("start", "duration", "reward"):
            if not _is_int(getattr(d, name)):
                out.append(Violation(ent, "integrality", f"{name} must be an integer"))
        if _is_int(d.duration) and d.duration < 1:
            out.append(Violation(ent, "duration", f"duration {d.duration} < 1"))
        if _is_int(d.reward) and d.reward <= 0:
            out.append(Violation(ent, "reward", f"reward {d.reward} <= 0"))
        if not d.requires:
            out.append(Violation(ent, "requires", "empty requirement set"))
        unknown = sorted(set(d.requires) - type_ids)
        if unknown:
            out.append(Violation(ent, "requires", f"unknown types {unknown}"))

    for t in inst.types:
        ent = f"type {t.id}"
        if not t.starts:
            out.append(Violation(ent, "stock", "no starting locations"))
        for loc, count in t.starts:
            if loc not in loc_ids:
                out.append(Violation(ent, "location-ref", f"unknown location {loc!r}"))
            if not _is_int(count):
                out.append(Violation(ent, "integrality", f"count at {loc} must be an integer"))
            elif count < 1:
                out.append(Violation(ent, "stock", f"count {count} at {loc} < 1"))
        locs = [loc for loc, _ in t.starts]
        if len(set(locs)) != len(locs):
            out.append(Violation(ent, "stock", "starting location listed twice"))
    return out


def check_instance(inst: Instance) -> Instance:
    violations = validate_instance(inst)
    if violations:
        raise InstanceValidationError(violations)
    return inst


def shared_start_location(inst: Instance) -> str | None:
    """The single location every resource starts from, or None if they differ."""
    locs = {loc for t in inst.types for loc, _ in t.starts}
    return next(iter(locs)) if len(locs) == 1 else None


def type_masks(inst: Instance) -> np.ndarray:
    """Bitmask of required types per demand (bit k = ``inst.types[k]``)."""
    tidx = inst.type_index
    masks = np.zeros(len(inst.demands), dtype=np.int64)
    for k, d in enumerate(inst.demands):
        m = 0
        for r in d.requires:
            m |= 1 << tidx[r]
        masks[k] = m
    return masks
