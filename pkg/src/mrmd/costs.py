"""Travel-cost variant: the objective is served reward minus the travel cost of every unit.

Costs come from the instance's ``c`` matrix and default to travel times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .approx import _require_shared_start, run_algorithm_a
from .checks import solution_cost
from .exact import ExactResult, solve_exact_with_costs
from .instance import Instance, PreconditionError, Solution
from .preprocess import ReachabilityData


@dataclass(frozen=True)
class CostedObjective:
    gross: int
    cost: int

    @property
    def net(self) -> int:
        return self.gross - self.cost


def costed_objective(inst: Instance, sol: Solution) -> CostedObjective:
    idx = inst.demand_index
    gross = sum(inst.demands[idx[d]].reward for d in sol.served)
    return CostedObjective(gross, solution_cost(inst, sol))


def solve_exact_costs(
    inst: Instance, reach: ReachabilityData, budget: float | None = None
) -> tuple[ExactResult, CostedObjective]:
    """Branch-and-bound on net reward; the solution's objective is the net value."""
    res = solve_exact_with_costs(inst, reach, budget)
    return res, costed_objective(inst, res.solution)


def cost_bound_holds(inst: Instance) -> bool:
    """Every location-to-location cost is at most ``w_min / (2|R|)``."""
    if not inst.demands:
        return True
    w_min = min(d.reward for d in inst.demands)
    c = inst.cost_matrix
    off = c[~np.eye(len(c), dtype=bool)]
    return bool(off.size == 0 or 2 * len(inst.types) * int(off.max()) <= w_min)


def run_algorithm_a_costs(
    inst: Instance, reach: ReachabilityData, force: bool = False
) -> tuple[Solution, CostedObjective]:
    """Algorithm A run on rewards alone, then charged for the travel it incurs.

    The ``2|R|`` guarantee needs every cost to be at most ``w_min / (2|R|)``.
    Without it the call is rejected unless ``force`` is set, in which case the
    result carries no certificate.
    """
    _require_shared_start(inst)
    ok = cost_bound_holds(inst)
    if not ok and not force:
        raise PreconditionError("some travel cost exceeds w_min / (2|R|); pass force to run anyway")
    sol = run_algorithm_a(inst, reach)
    obj = costed_objective(inst, sol)
    cert = f">= (OPT - C*)/{2 * len(inst.types)}" if ok else None
    return Solution(sol.served, sol.paths, obj.net, cert), obj
