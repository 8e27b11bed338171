"""JSON instance and solution files.

Instance file (version 1)::

    {"version": 1,
     "grid": {"width": 20, "height": 20},            # optional
     "locations": [{"id": "a", "x": 0, "y": 3}, ...], # x/y optional for matrix travel
     "travel": {"mode": "grid_l1"}
            or {"mode": "matrix", "f": [[...]], "c": [[...]]},  # c optional
     "resource_types": [{"id": "1", "starts": [{"location": "a", "count": 2}]}],
     "demands": [{"id": "d0", "location": "a", "start": 10, "duration": 30,
                  "reward": 60, "requires": ["1", "2"]}]}

Solution file::

    {"objective": 42, "served": ["d0"],
     "paths": [{"type": "1", "unit": 0, "start_location": "a", "demands": ["d0"]}],
     "certificate": ">= OPT/2"}                      # optional

Unknown keys are rejected everywhere; key order does not matter.
"""

from __future__ import annotations

import json
from typing import Any

from .instance import (
    GRID_L1,
    MATRIX,
    Demand,
    Instance,
    InstanceError,
    InstanceValidationError,
    Location,
    PathRecord,
    ResourceTypeSpec,
    Solution,
    TravelMetric,
    validate_instance,
)

FORMAT_VERSION = 1


class ParseError(InstanceError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def _expect_keys(obj: Any, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise ParseError(where, f"expected an object, got {type(obj).__name__}")
    missing = required - obj.keys()
    if missing:
        raise ParseError(where, f"missing field(s) {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise ParseError(where, f"unknown field(s) {sorted(unknown)}")
    return obj


def _int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(where, f"expected an integer, got {v!r}")
    return v


def _ident(v: Any, where: str) -> str:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ParseError(where, f"expected a string id, got {v!r}")
    return str(v)


def _list(v: Any, where: str) -> list:
    if not isinstance(v, list):
        raise ParseError(where, f"expected a list, got {type(v).__name__}")
    return v


def _matrix(v: Any, where: str) -> tuple[tuple[int, ...], ...]:
    rows = _list(v, where)
    return tuple(
        tuple(_int(x, f"{where}[{i}][{j}]") for j, x in enumerate(_list(row, f"{where}[{i}]")))
        for i, row in enumerate(rows)
    )


def _loads(data: bytes | str) -> Any:
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    except UnicodeDecodeError as exc:
        raise ParseError("input", f"not UTF-8: {exc}") from exc


def instance_from_dict(doc: Any) -> Instance:
    _expect_keys(doc, "$", {"version", "locations", "travel", "resource_types", "demands"}, {"grid"})
    if _int(doc["version"], "$.version") != FORMAT_VERSION:
        raise ParseError("$.version", f"unsupported version {doc['version']}")
    grid = None
    if "grid" in doc:
        g = _expect_keys(doc["grid"], "$.grid", {"width", "height"})
        grid = (_int(g["width"], "$.grid.width"), _int(g["height"], "$.grid.height"))

    locations = []
    for k, raw in enumerate(_list(doc["locations"], "$.locations")):
        where = f"$.locations[{k}]"
        _expect_keys(raw, where, {"id"}, {"x", "y"})
        x = _int(raw["x"], f"{where}.x") if "x" in raw else None
        y = _int(raw["y"], f"{where}.y") if "y" in raw else None
        locations.append(Location(_ident(raw["id"], f"{where}.id"), x, y))

    tr = doc["travel"]
    if not isinstance(tr, dict) or "mode" not in tr:
        raise ParseError("$.travel", "expected an object with a mode")
    if tr["mode"] == GRID_L1:
        _expect_keys(tr, "$.travel", {"mode"})
        travel, costs = TravelMetric(GRID_L1), None
    elif tr["mode"] == MATRIX:
        _expect_keys(tr, "$.travel", {"mode", "f"}, {"c"})
        travel = TravelMetric(MATRIX, _matrix(tr["f"], "$.travel.f"))
        costs = _matrix(tr["c"], "$.travel.c") if "c" in tr else None
    else:
        raise ParseError("$.travel.mode", f"unknown mode {tr['mode']!r}")

    types = []
    for k, raw in enumerate(_list(doc["resource_types"], "$.resource_types")):
        where = f"$.resource_types[{k}]"
        _expect_keys(raw, where, {"id", "starts"})
        starts = []
        for q, st in enumerate(_list(raw["starts"], f"{where}.starts")):
            w2 = f"{where}.starts[{q}]"
            _expect_keys(st, w2, {"location", "count"})
            starts.append((_ident(st["location"], f"{w2}.location"), _int(st["count"], f"{w2}.count")))
        types.append(ResourceTypeSpec(_ident(raw["id"], f"{where}.id"), tuple(starts)))

    demands = []
    for k, raw in enumerate(_list(doc["demands"], "$.demands")):
        where = f"$.demands[{k}]"
        _expect_keys(raw, where, {"id", "location", "start", "duration", "reward", "requires"})
        req = [_ident(r, f"{where}.requires") for r in _list(raw["requires"], f"{where}.requires")]
        demands.append(Demand(
            _ident(raw["id"], f"{where}.id"),
            _ident(raw["location"], f"{where}.location"),
            _int(raw["start"], f"{where}.start"),
            _int(raw["duration"], f"{where}.duration"),
            _int(raw["reward"], f"{where}.reward"),
            frozenset(req),
        ))
    return Instance(tuple(locations), tuple(demands), tuple(types), travel, costs, grid)


def parse_instance(data: bytes | str, validate: bool = True) -> Instance:
    """Parse an instance file; raises ``ParseError`` or ``InstanceValidationError``."""
    inst = instance_from_dict(_loads(data))
    if validate:
        violations = validate_instance(inst)
        if violations:
            raise InstanceValidationError(violations)
    return inst


def instance_to_dict(inst: Instance) -> dict:
    doc: dict[str, Any] = {"version": FORMAT_VERSION}
    if inst.grid is not None:
        doc["grid"] = {"width": inst.grid[0], "height": inst.grid[1]}
    locs = []
    for loc in inst.locations:
        item: dict[str, Any] = {"id": loc.id}
        if loc.x is not None:
            item["x"] = loc.x
        if loc.y is not None:
            item["y"] = loc.y
        locs.append(item)
    doc["locations"] = locs
    if inst.travel.mode == GRID_L1:
        if inst.costs is not None:
            raise ValueError("explicit costs need matrix travel mode in the file format")
        doc["travel"] = {"mode": GRID_L1}
    else:
        doc["travel"] = {"mode": MATRIX, "f": [list(row) for row in inst.travel.matrix]}
        if inst.costs is not None:
            doc["travel"]["c"] = [list(row) for row in inst.costs]
    doc["resource_types"] = [
        {"id": t.id, "starts": [{"location": loc, "count": c} for loc, c in t.starts]} for t in inst.types
    ]
    order = inst.type_index
    doc["demands"] = [
        {
            "id": d.id,
            "location": d.location,
            "start": d.start,
            "duration": d.duration,
            "reward": d.reward,
            "requires": sorted(d.requires, key=lambda r: order.get(r, len(order))),
        }
        for d in inst.demands
    ]
    return doc


def serialize_instance(inst: Instance) -> bytes:
    violations = validate_instance(inst)
    if violations:
        raise InstanceValidationError(violations)
    return (json.dumps(instance_to_dict(inst), indent=1) + "\n").encode("utf-8")


def solution_to_dict(sol: Solution, inst: Instance | None = None) -> dict:
    served = list(sol.served)
    if inst is not None:
        idx = inst.demand_index
        served.sort(key=lambda d: idx.get(d, len(idx)))
    else:
        served.sort()
    doc: dict[str, Any] = {
        "objective": sol.objective,
        "served": served,
        "paths": [
            {"type": p.type, "unit": p.unit, "start_location": p.start_location, "demands": list(p.demands)}
            for p in sol.paths
        ],
    }
    if sol.certificate is not None:
        doc["certificate"] = sol.certificate
    return doc


def serialize_solution(sol: Solution, inst: Instance | None = None) -> bytes:
    return (json.dumps(solution_to_dict(sol, inst), indent=1) + "\n").encode("utf-8")


def parse_solution(data: bytes | str) -> Solution:
    doc = _expect_keys(_loads(data), "$", {"objective", "served", "paths"}, {"certificate"})
    served = frozenset(_ident(d, "$.served") for d in _list(doc["served"], "$.served"))
    paths = []
    for k, raw in enumerate(_list(doc["paths"], "$.paths")):
        where = f"$.paths[{k}]"
        _expect_keys(raw, where, {"type", "unit", "start_location", "demands"})
        paths.append(PathRecord(
            _ident(raw["type"], f"{where}.type"),
            _int(raw["unit"], f"{where}.unit"),
            _ident(raw["start_location"], f"{where}.start_location"),
            tuple(_ident(d, f"{where}.demands") for d in _list(raw["demands"], f"{where}.demands")),
        ))
    cert = doc.get("certificate")
    if cert is not None and not isinstance(cert, str):
        raise ParseError("$.certificate", "expected a string")
    return Solution(served, tuple(paths), _int(doc["objective"], "$.objective"), cert)
