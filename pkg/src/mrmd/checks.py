"""Independent solution checker.

Works from the raw instance data (travel matrix, times, stocks) rather than
the precomputed reachability structures, so it can referee every solver.
"""

from __future__ import annotations

from collections import Counter

from .instance import Instance, Solution, Violation


def validate_solution(inst: Instance, sol: Solution, costs: bool = False) -> list[Violation]:
    """All ways ``sol`` breaks the model; an empty list means it is feasible.

    Checked: path records name known types, start locations and demands; no
    start location fields more units than it stocks; every leg is on time;
    a unit only visits demands that need its type; each served demand gets
    exactly one unit of each required type and unserved demands get none;
    the objective equals served reward, less travel cost when ``costs``.
    """
    out: list[Violation] = []
    didx = inst.demand_index
    lidx = inst.location_index
    f = inst.travel_matrix
    c = inst.cost_matrix
    stocks = {t.id: dict(t.starts) for t in inst.types}

    for d in sol.served:
        if d not in didx:
            out.append(Violation(f"served/{d}", "unknown-demand", "served demand is not in the instance"))

    used: Counter = Counter()
    units: Counter = Counter()
    visits: Counter = Counter()
    travel_cost = 0
    for p in sol.paths:
        where = f"path/{p.type}#{p.unit}"
        if p.type not in stocks:
            out.append(Violation(where, "unknown-type", f"type {p.type!r} not in instance"))
            continue
        units[(p.type, p.unit)] += 1
        if p.start_location not in stocks[p.type]:
            out.append(Violation(where, "bad-start", f"type {p.type} has no units at {p.start_location!r}"))
            continue
        used[(p.type, p.start_location)] += 1
        prev_loc = lidx[p.start_location]
        ready = None  # time the unit is free, None before its first demand
        for did in p.demands:
            if did not in didx:
                out.append(Violation(where, "unknown-demand", f"demand {did!r} not in instance"))
                break
            d = inst.demands[didx[did]]
            if p.type not in d.requires:
                out.append(Violation(where, "type-not-required", f"{did} does not need type {p.type}"))
            loc = lidx[d.location]
            arrive = (0 if ready is None else ready) + int(f[prev_loc, loc])
            if arrive > d.start:
                out.append(Violation(where, "late", f"reaches {did} at {arrive} > start {d.start}"))
            if costs:
                travel_cost += int(c[prev_loc, loc])
            visits[(did, p.type)] += 1
            ready = d.end
            prev_loc = loc

    for (r, unit), n in units.items():
        if n > 1:
            out.append(Violation(f"path/{r}#{unit}", "duplicate-unit", f"unit listed {n} times"))
    for (r, loc), n in used.items():
        if n > stocks[r][loc]:
            out.append(Violation(f"type/{r}", "stock", f"{n} units used at {loc}, only {stocks[r][loc]} available"))

    for d in inst.demands:
        for r in sorted(d.requires):
            n = visits[(d.id, r)]
            want = 1 if d.id in sol.served else 0
            if n != want:
                rule = "not-covered" if want else "unserved-visited"
                out.append(Violation(f"demand/{d.id}", rule, f"type {r} visits {n} times, expected {want}"))

    reward = sum(inst.demands[didx[d]].reward for d in sol.served if d in didx)
    expected = reward - travel_cost
    if sol.objective != expected:
        out.append(Violation("objective", "mismatch", f"reported {sol.objective}, recomputed {expected}"))
    return out


def solution_cost(inst: Instance, sol: Solution) -> int:
    """Total travel cost of the solution's paths, start legs included."""
    lidx = inst.location_index
    c = inst.cost_matrix
    dloc = {d.id: lidx[d.location] for d in inst.demands}
    total = 0
    for p in sol.paths:
        prev = lidx[p.start_location]
        for did in p.demands:
            total += int(c[prev, dloc[did]])
            prev = dloc[did]
    return total
