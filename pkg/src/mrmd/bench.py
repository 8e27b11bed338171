"""Benchmark grid and resource-sweep harness with CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .approx import build_conflict_graph, greedy_color, run_algorithm_a, run_algorithm_b
from .exact import evaluate_fixed_y, solve_brute_force, solve_exact_bb
from .generate import GeneratorConfig, generate_random_instance
from .instance import Instance, Location, ResourceTypeSpec
from .preprocess import build_reachability

# (|R|, |D|, L) cells of the published run-time tables
FULL_GRID: tuple[tuple[int, int, int], ...] = tuple(
    (r, d, l)
    for r, ls in {
        2: (10, 14, 18, 22, 26, 30, 34, 38),
        3: (12, 18, 24, 30, 36, 42, 48, 54),
        4: (16, 24, 32, 40, 48, 56, 64, 72),
        5: (20, 30, 40, 50, 60, 70, 80, 90),
        6: (24, 36, 48, 60, 72, 84, 96, 108),
        7: (28, 42, 56, 70, 84, 98, 112, 126),
    }.items()
    for d, l in zip(range(100, 900, 100), ls)
)


def desk_grid() -> tuple[tuple[int, int, int], ...]:
    """|R| in {2, 3, 4}, |D| in {25, 50, 100}; L shrinks with |D| from the |D| = 100 row."""
    base = {r: l for r, d, l in FULL_GRID if d == 100}
    return tuple(
        (r, d, r * math.ceil(base[r] * d / 100 / r)) for r in (2, 3, 4) for d in (25, 50, 100)
    )


SOLVERS = ("exact", "brute", "a", "b")
APPROX = {"a", "b"}


@dataclass(frozen=True)
class BenchConfig:
    cells: tuple[tuple[int, int, int], ...] = field(default_factory=desk_grid)
    seeds: int = 10
    time_limit: float = 60.0
    solvers: tuple[str, ...] = ("exact",)
    reward_scale: int = 1
    shared_start: bool = False  # forced on when an approximation solver is selected

    def validate(self) -> None:
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ValueError(f"unknown solver(s) {sorted(unknown)}; choose from {SOLVERS}")
        if self.seeds < 1 or self.time_limit < 0:
            raise ValueError("need seeds >= 1 and a nonnegative time limit")
        for cell in self.cells:
            if len(cell) != 3 or cell[2] % cell[0]:
                raise ValueError(f"cell {cell}: L must be a multiple of |R|")

    @classmethod
    def from_json(cls, text: str) -> "BenchConfig":
        raw = json.loads(text)
        allowed = {f.name for f in fields(cls)}
        unknown = set(raw) - allowed
        if unknown:
            raise ValueError(f"unknown grid field(s) {sorted(unknown)}")
        if raw.get("cells") == "full":
            raw["cells"] = FULL_GRID
        elif raw.get("cells") == "desk":
            raw["cells"] = desk_grid()
        if "cells" in raw:
            raw["cells"] = tuple(tuple(int(v) for v in c) for c in raw["cells"])
        if "solvers" in raw:
            raw["solvers"] = tuple(raw["solvers"])
        cfg = cls(**raw)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class BenchRow:
    n_types: int
    n_demands: int
    n_resources: int
    seed: int
    solver: str
    objective: int
    wall_time: float
    optimal: bool


def _run_solver(name: str, inst: Instance, time_limit: float) -> tuple[int, bool]:
    reach = build_reachability(inst)
    if name == "exact":
        res = solve_exact_bb(inst, reach, budget=time_limit)
        return res.objective, res.optimal
    if name == "brute":
        return solve_brute_force(inst, reach, cap=len(inst.demands)).objective, True
    if name == "a":
        return run_algorithm_a(inst, reach).objective, False
    if name == "b":
        return run_algorithm_b(inst, reach, greedy_color(build_conflict_graph(inst))).objective, False
    raise ValueError(f"unknown solver {name!r}")


def cell_config(cell: tuple[int, int, int], config: BenchConfig) -> GeneratorConfig:
    r, d, l = cell
    shared = config.shared_start or bool(APPROX.intersection(config.solvers))
    return GeneratorConfig(r, d, l, reward_scale=config.reward_scale, shared_start=shared)


def run_benchmark_suite(config: BenchConfig, progress: Callable[[BenchRow], None] | None = None) -> list[BenchRow]:
    """One row per (cell, seed, solver), ordered by cell, then seed, then solver."""
    config.validate()
    rows = []
    for cell in config.cells:
        gen = cell_config(cell, config)
        for seed in range(config.seeds):
            inst = generate_random_instance(gen, seed)
            for name in config.solvers:
                t0 = time.perf_counter()
                obj, opt = _run_solver(name, inst, config.time_limit)
                row = BenchRow(*cell, seed, name, obj, time.perf_counter() - t0, opt)
                rows.append(row)
                if progress:
                    progress(row)
    return rows


@dataclass(frozen=True)
class CellSummary:
    n_types: int
    n_demands: int
    n_resources: int
    solver: str
    runs: int
    mean_objective: float
    mean_wall_time: float
    optimal_fraction: float


def summarize(rows: Sequence[BenchRow]) -> list[CellSummary]:
    groups: dict[tuple, list[BenchRow]] = {}
    for row in rows:
        groups.setdefault((row.n_types, row.n_demands, row.n_resources, row.solver), []).append(row)
    return [
        CellSummary(
            *key,
            len(g),
            float(np.mean([r.objective for r in g])),
            float(np.mean([r.wall_time for r in g])),
            float(np.mean([r.optimal for r in g])),
        )
        for key, g in groups.items()
    ]


def certificate_violations(rows: Sequence[BenchRow]) -> list[str]:
    """Rows where Algorithm A falls below ``OPT / |R|`` against a proven optimum of the same instance."""
    out = []
    best: dict[tuple, int] = {}
    for r in rows:
        if r.solver in ("exact", "brute") and r.optimal:
            best[(r.n_types, r.n_demands, r.n_resources, r.seed)] = r.objective
    for r in rows:
        key = (r.n_types, r.n_demands, r.n_resources, r.seed)
        if r.solver == "a" and key in best and r.n_types * r.objective < best[key]:
            out.append(f"{key}: |R|*A = {r.n_types * r.objective} < OPT = {best[key]}")
    return out


def rows_to_csv(rows: Iterable, with_timing: bool = True) -> str:
    rows = list(rows)
    buf = io.StringIO()
    if not rows:
        return ""
    names = [f.name for f in fields(rows[0]) if with_timing or "time" not in f.name]
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        rec = {k: v for k, v in asdict(row).items() if k in names}
        for k, v in rec.items():
            if isinstance(v, float):
                rec[k] = f"{v:.6f}"
            elif isinstance(v, bool):
                rec[k] = int(v)
        writer.writerow(rec)
    return buf.getvalue()


def write_csv(rows: Iterable, path: str | Path, with_timing: bool = True) -> None:
    Path(path).write_text(rows_to_csv(rows, with_timing))


# -- resource sweep ---------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    added_resources: int  # per type
    objective: int
    optimal: bool
    total_reward: int


def add_units(inst: Instance, extra: dict[str, list[tuple[int, int]]]) -> Instance:
    """Copy of a grid instance with extra units per type placed at the given grid points."""
    locs = {l.id: l for l in inst.locations}
    types = []
    for t in inst.types:
        counts = dict(t.starts)
        for x, y in extra.get(t.id, ()):
            lid = f"g{x}_{y}"
            locs.setdefault(lid, Location(lid, x, y))
            counts[lid] = counts.get(lid, 0) + 1
        types.append(ResourceTypeSpec(t.id, tuple(counts.items())))
    ordered = tuple(sorted(locs.values(), key=lambda l: (l.x, l.y)))
    return Instance(ordered, inst.demands, tuple(types), inst.travel, inst.costs, inst.grid)


def bicriteria_sweep(
    gen: GeneratorConfig, seed: int, max_added: int, time_limit: float | None = 60.0
) -> list[SweepPoint]:
    """Exact optimum as every type gains 0, 1, ..., ``max_added`` units.

    Extra units are drawn once per type from a seeded stream, so each step
    adds to the previous step's fleet.  If a solve stops at its time limit
    below the previous step's value, the previous served set (still
    routable with more units) is reported instead, flagged non-optimal.
    """
    inst = generate_random_instance(gen, seed)
    rng = np.random.default_rng([seed, 1])
    w, h = gen.grid
    draws = {
        t.id: [(int(rng.integers(w)), int(rng.integers(h))) for _ in range(max_added)] for t in inst.types
    }
    points = []
    prev: frozenset[str] = frozenset()
    for a in range(max_added + 1):
        cur = add_units(inst, {r: pts[:a] for r, pts in draws.items()})
        reach = build_reachability(cur)
        res = solve_exact_bb(cur, reach, budget=time_limit)
        served, obj = res.solution.served, res.objective
        if not res.optimal and prev:
            carried = evaluate_fixed_y(cur, reach, prev)
            if carried.feasible and carried.reward > obj:
                served, obj = prev, carried.reward
        prev = served
        points.append(SweepPoint(a, obj, res.optimal, cur.total_reward))
    return points


def run_sweep_suite(
    gen: GeneratorConfig, seeds: Sequence[int], max_added: int, time_limit: float | None = 60.0
) -> list[tuple[int, SweepPoint]]:
    return [(s, p) for s in seeds for p in bicriteria_sweep(gen, s, max_added, time_limit)]


def sweep_to_csv(points: Sequence[tuple[int, SweepPoint]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seed", "added_resources", "objective", "optimal", "total_reward"])
    for seed, p in points:
        writer.writerow([seed, p.added_resources, p.objective, int(p.optimal), p.total_reward])
    return buf.getvalue()
