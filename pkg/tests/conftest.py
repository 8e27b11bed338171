import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from mrmd.generate import GeneratorConfig, generate_random_instance, instance_from_arrays  # noqa: E402

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: dict[int, str] = {}


def small_config(seed: int, max_demands: int = 10, max_types: int = 3, shared_start: bool = False, **kw):
    """Random small generator config drawn from ``seed``."""
    rng = np.random.default_rng([seed, 99])
    r = int(rng.integers(1, max_types + 1))
    d = int(rng.integers(1, max_demands + 1))
    per = int(rng.integers(1, 3))
    base = dict(grid=(4, 4), horizon=(0, 100), service=(5, 15, 40), shared_start=shared_start)
    base.update(kw)
    return GeneratorConfig(r, d, r * per, **base)


def small_instance(seed: int, **kw):
    return generate_random_instance(small_config(seed, **kw), seed)


@pytest.fixture
def record_acceptance():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


def one_or_all_instance(seed: int, grouped: bool = False, max_demands: int = 10, max_types: int = 3):
    """Zero-travel instance whose demands need one type or every type.

    Without ``grouped`` all demands start together; with it durations are 1
    and start times fall in a short window so groups compete for units.
    """
    rng = np.random.default_rng([seed, 5])
    r = int(rng.integers(1, max_types + 1))
    types = [str(k) for k in range(r)]
    n = int(rng.integers(1, max_demands + 1))
    requires = [types if rng.random() < 0.35 else [types[int(rng.integers(r))]] for _ in range(n)]
    if grouped:
        starts = [int(rng.integers(0, 3)) for _ in range(n)]
        durations = [1] * n
    else:
        starts = [7] * n
        durations = [int(rng.integers(1, 60)) for _ in range(n)]
    rewards = [int(rng.integers(1, 20)) for _ in range(n)]
    stocks = {t: [("o", int(rng.integers(1, 4)))] for t in types}
    return instance_from_arrays(starts, durations, rewards, requires, ["o"] * n, stocks, [[0]], ["o"])


C5_TYPES = ("0", "1", "2", "3", "4")


def c5_instance(seed: int, max_demands: int = 10):
    """Shared-start instance whose conflict graph is the 5-cycle {i, i+1 mod 5}."""
    rng = np.random.default_rng([seed, 7])
    n = int(rng.integers(5, max_demands + 1))
    nodes = [[C5_TYPES[i], C5_TYPES[(i + 1) % 5]] for i in range(5)]
    requires = nodes + [nodes[int(rng.integers(5))] for _ in range(n - 5)]
    locs = ["o", "p", "q"]
    f = [[0, 3, 5], [3, 0, 4], [5, 4, 0]]
    starts = [int(rng.integers(0, 40)) for _ in range(n)]
    durations = [int(rng.integers(2, 15)) for _ in range(n)]
    rewards = [int(rng.integers(1, 30)) for _ in range(n)]
    demand_locs = [locs[int(rng.integers(3))] for _ in range(n)]
    stocks = {t: [("o", int(rng.integers(1, 3)))] for t in C5_TYPES}
    return instance_from_arrays(starts, durations, rewards, requires, demand_locs, stocks, f, locs)


def c5_coloring():
    """5:2-colouring of the 5-cycle: node i gets colours 2i and 2i+1 (mod 5, shifted to 1..5)."""
    from mrmd.approx import Coloring

    return Coloring(5, 2, {
        frozenset({C5_TYPES[i], C5_TYPES[(i + 1) % 5]}): frozenset({(2 * i) % 5 + 1, (2 * i + 1) % 5 + 1})
        for i in range(5)
    })


def with_costs(inst, cost):
    """Copy of ``inst`` with cost matrix ``cost`` (array or callable of the travel matrix)."""
    import dataclasses

    mat = cost(inst.travel_matrix) if callable(cost) else np.asarray(cost)
    return dataclasses.replace(inst, costs=tuple(tuple(int(v) for v in row) for row in mat))
