"""Instance generators: seeded random grid instances and the N3DM gadget.

The random generator follows the computational-study recipe: demands and
resource units placed uniformly on a grid, start times uniform over the
horizon, triangular service times, each type required independently with
probability one half, and rewards proportional to service time times the
number of required types.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import (
    GRID_L1,
    MATRIX,
    Demand,
    Instance,
    Location,
    ResourceTypeSpec,
    TravelMetric,
)


@dataclass(frozen=True)
class GeneratorConfig:
    n_types: int = 2
    n_demands: int = 100
    total_resources: int = 10
    grid: tuple[int, int] = (20, 20)
    horizon: tuple[int, int] = (0, 1440)
    service: tuple[float, float, float] = (15, 30, 120)  # (min, mode, max) minutes
    p_require: float = 0.5
    reward_scale: int = 1  # 100 gives the "scaled demands" variant
    shared_start: bool = False  # every unit starts at one random grid point

    def validate(self) -> None:
        lo, mode, hi = self.service
        if self.n_types < 1 or self.n_demands < 0:
            raise ValueError("need at least one resource type and a nonnegative demand count")
        if self.total_resources < self.n_types or self.total_resources % self.n_types:
            raise ValueError(
                f"total_resources={self.total_resources} must split evenly over {self.n_types} types"
            )
        if not (lo <= mode <= hi):
            raise ValueError(f"service triangle needs min <= mode <= max, got {self.service}")
        if lo < 0.5:
            raise ValueError("service times must round to at least 1 minute")
        if self.grid[0] < 1 or self.grid[1] < 1:
            raise ValueError("grid must be at least 1x1")
        if self.horizon[0] > self.horizon[1]:
            raise ValueError("horizon start after horizon end")
        if not (0 < self.p_require <= 1):
            raise ValueError("p_require must be in (0, 1]")
        if self.reward_scale < 1:
            raise ValueError("reward_scale must be positive")

    @property
    def per_type(self) -> int:
        return self.total_resources // self.n_types


def _loc_id(x: int, y: int) -> str:
    return f"g{x}_{y}"


def generate_random_instance(config: GeneratorConfig, seed: int) -> Instance:
    config.validate()
    rng = np.random.default_rng(seed)
    w, h = config.grid
    type_ids = [str(k + 1) for k in range(config.n_types)]
    used: dict[str, Location] = {}

    def place() -> str:
        x, y = int(rng.integers(w)), int(rng.integers(h))
        lid = _loc_id(x, y)
        used.setdefault(lid, Location(lid, x, y))
        return lid

    if config.shared_start:
        depot = place()
    types = []
    for r in type_ids:
        counts: dict[str, int] = {}
        for _ in range(config.per_type):
            loc = depot if config.shared_start else place()
            counts[loc] = counts.get(loc, 0) + 1
        types.append(ResourceTypeSpec(r, tuple(counts.items())))

    lo, mode, hi = config.service
    demands = []
    for k in range(config.n_demands):
        loc = place()
        start = int(rng.integers(config.horizon[0], config.horizon[1] + 1))
        dur = hi if lo == hi else float(rng.triangular(lo, mode, hi))
        dur = max(1, int(round(dur)))
        while True:
            req = frozenset(r for r in type_ids if rng.random() < config.p_require)
            if req:
                break
        demands.append(Demand(f"d{k}", loc, start, dur, dur * len(req) * config.reward_scale, req))
    locations = tuple(sorted(used.values(), key=lambda l: (l.x, l.y)))
    return Instance(locations, tuple(demands), tuple(types), TravelMetric(GRID_L1), None, (w, h))


@dataclass(frozen=True)
class N3dmInput:
    t: int
    d: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]

    def validate(self) -> None:
        t = self.t
        if t < 1 or not (len(self.a) == len(self.b) == len(self.c) == t):
            raise ValueError("a, b, c must each have t entries")
        if sum(self.a) + sum(self.b) + sum(self.c) != t * self.d:
            raise ValueError("sum of a, b, c must equal t*d")
        if not all(0 < v < self.d for v in (*self.a, *self.b, *self.c)):
            raise ValueError("every a_i, b_i, c_i must lie strictly between 0 and d")

    def is_yes_instance(self) -> bool:
        """Brute-force check for permutations with a_i + b_rho(i) + c_sigma(i) = d."""
        from itertools import permutations

        idx = range(self.t)
        for rho in permutations(idx):
            if all(self.a[i] + self.b[rho[i]] < self.d for i in idx):
                need = sorted(self.d - self.a[i] - self.b[rho[i]] for i in idx)
                if need == sorted(self.c):
                    return True
        return False


N3DM_TYPE_BOTH = ("0", "1")


def build_n3dm_instance(n3dm: N3dmInput) -> Instance:
    """Two-type instance whose units can all stay busy on [0, T] iff the N3DM input is a yes-instance.

    Type "1" has t units, type "0" has t^2.  Travel is zero everywhere.  Each
    demand is an interval (start, end); its reward is its length times the
    number of types it needs.
    """
    n3dm.validate()
    t, dd, a, b, c = n3dm.t, n3dm.d, n3dm.a, n3dm.b, n3dm.c
    A = {i: i for i in range(1, t + 1)}
    B = {j: t + j for j in range(1, t + 1)}
    C = {(i, j): 2 * t + (i - 1) * t + j for i in range(1, t + 1) for j in range(1, t + 1)}
    S = t * t + 2 * t
    T = S + 2 * dd + 1
    both, only0, only1 = frozenset({"0", "1"}), frozenset({"0"}), frozenset({"1"})
    rng1 = range(1, t + 1)

    spans: list[tuple[str, int, int, frozenset[str]]] = []
    spans += [(f"0-A{i}", 0, A[i], both) for i in rng1]
    spans += [(f"A{i}-C{i}{j}", A[i], C[i, j], both) for i in rng1 for j in rng1]
    spans += [(f"c{k}-T", S + dd - c[k - 1], T, both) for k in rng1]
    spans += [(f"0-B{j}#{q}", 0, B[j], only0) for j in rng1 for q in range(1, t)]
    spans += [(f"B{j}-C{i}{j}", B[j], C[i, j], only0) for i in rng1 for j in rng1]
    spans += [(f"C{i}{j}-ab/0", C[i, j], S + a[i - 1] + b[j - 1], only0) for i in rng1 for j in rng1]
    spans += [(f"ab{i}{j}-T1", S + a[i - 1] + b[j - 1], T - 1, only0) for i in rng1 for j in rng1]
    spans += [(f"T1-T#{q}", T - 1, T, only0) for q in range(1, t * t - t + 1)]
    spans += [(f"C{i}{j}-ab/1", C[i, j], S + a[i - 1] + b[j - 1], only1) for i in rng1 for j in rng1]

    here = Location("o")
    demands = tuple(
        Demand(name, "o", u, v - u, (v - u) * len(req), req) for name, u, v, req in spans
    )
    types = (ResourceTypeSpec("0", (("o", t * t),)), ResourceTypeSpec("1", (("o", t),)))
    return Instance((here,), demands, types, TravelMetric(MATRIX, ((0,),)))


def n3dm_horizon(n3dm: N3dmInput) -> tuple[int, int]:
    """(S, T) for the gadget."""
    S = n3dm.t * n3dm.t + 2 * n3dm.t
    return S, S + 2 * n3dm.d + 1


def n3dm_busy_reward(n3dm: N3dmInput) -> int:
    """Reward collected when every unit is busy throughout [0, T]."""
    _, T = n3dm_horizon(n3dm)
    return (n3dm.t * n3dm.t + n3dm.t) * T


def random_n3dm(rng: np.random.Generator, t: int, d: int, yes: bool | None = None, tries: int = 1000) -> N3dmInput:
    """Random valid N3DM input; ``yes`` forces a satisfiable or unsatisfiable draw."""
    for _ in range(tries):
        if yes:
            a = rng.integers(1, d - 1, size=t)
            b = np.array([int(rng.integers(1, d - ai)) for ai in a])
            c = d - a - b
            cand = N3dmInput(t, d, tuple(int(v) for v in a), tuple(int(v) for v in rng.permutation(b)),
                             tuple(int(v) for v in rng.permutation(c)))
        else:
            vals = rng.integers(1, d, size=3 * t - 1)
            last = t * d - int(vals.sum())
            if not (0 < last < d):
                continue
            allv = [int(v) for v in vals] + [last]
            cand = N3dmInput(t, d, tuple(allv[:t]), tuple(allv[t:2 * t]), tuple(allv[2 * t:]))
        try:
            cand.validate()
        except ValueError:
            continue
        if yes is None or cand.is_yes_instance() == yes:
            return cand
    raise RuntimeError(f"no N3DM input found for t={t}, d={d}, yes={yes}")


def instance_from_arrays(
    starts: Sequence[int],
    durations: Sequence[int],
    rewards: Sequence[int],
    requires: Sequence[Sequence[str]],
    demand_locs: Sequence[str],
    type_starts: dict[str, Sequence[tuple[str, int]]],
    matrix: Sequence[Sequence[int]],
    loc_ids: Sequence[str],
    costs: Sequence[Sequence[int]] | None = None,
) -> Instance:
    """Build an explicit-matrix instance from plain arrays (handy for hand-written cases)."""
    locations = tuple(Location(l) for l in loc_ids)
    demands = tuple(
        Demand(f"d{k}", demand_locs[k], int(starts[k]), int(durations[k]), int(rewards[k]), frozenset(requires[k]))
        for k in range(len(starts))
    )
    types = tuple(ResourceTypeSpec(r, tuple((l, int(c)) for l, c in s)) for r, s in type_starts.items())
    mat = tuple(tuple(int(v) for v in row) for row in matrix)
    cst = None if costs is None else tuple(tuple(int(v) for v in row) for row in costs)
    return Instance(locations, demands, types, TravelMetric(MATRIX, mat), cst)
