"""LP relaxation of the arc-flow model and the bicriteria rounding built on it.

Variables: ``y_d`` per demand and, per resource type ``r``, ``x`` on every
start-to-demand arc, demand-to-demand arc and demand-to-sink arc of ``r``'s
graph, all in ``[0, 1]``.  Rows, per type: units leaving a start location
stay within its stock; inflow equals outflow at every demand; inflow is at
least ``y_d``.  The objective is ``sum_d w_d y_d``.

The bicriteria rounding keeps the demands whose LP value is at least
``1 - k*eps``, scales the flow up by ``1 / (1 - k*eps)`` (on an instance
with stocks inflated by the same factor, rounded up) and pushes every arc
back to at most one unit of flow with :func:`rebound_flows`.  That proves
the kept set is routable; the final paths come from an integral re-solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .exact import evaluate_fixed_y
from .flow import FlowNetwork, solve_min_cost_flow
from .instance import Instance, Solution
from .preprocess import ReachabilityData, build_reachability

SINK = ("t",)
THRESHOLD_SLACK = 1e-9
ROW_TOL = 1e-9


def src(loc: str) -> tuple:
    return ("s", loc)


def dem(j: int) -> tuple:
    return ("d", j)


Arc = tuple[tuple, tuple]  # (tail node, head node)


@dataclass
class LpRelaxation:
    n_demands: int
    rewards: tuple[int, ...]
    # column index of x^r on arc (tail, head)
    x_index: dict[tuple[str, tuple, tuple], int] = field(default_factory=dict)
    # row records: (kind, type, node) with kind in {"stock", "conserve", "cover"}
    rows: list[tuple[str, str, tuple]] = field(default_factory=list)
    a_ub: sparse.csr_matrix | None = None
    b_ub: np.ndarray | None = None
    a_eq: sparse.csr_matrix | None = None
    b_eq: np.ndarray | None = None

    def y_index(self, d: int) -> int:
        return d

    @property
    def num_vars(self) -> int:
        return self.n_demands + len(self.x_index)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def objective(self) -> np.ndarray:
        c = np.zeros(self.num_vars)
        c[: self.n_demands] = self.rewards
        return c


def build_lp_relaxation(inst: Instance, reach: ReachabilityData) -> LpRelaxation:
    n = len(inst.demands)
    lp = LpRelaxation(n, tuple(d.reward for d in inst.demands))
    col = n
    arcs_of: dict[str, list[Arc]] = {}
    for r in inst.type_ids:
        view = reach.view(r)
        arcs: list[Arc] = []
        for loc, _, first in view.starts:
            arcs += [(src(loc), dem(j)) for j in first]
        for i in view.demands:
            arcs += [(dem(i), dem(j)) for j in view.succ.get(i, ())]
        arcs += [(dem(j), SINK) for j in view.demands]
        for a in arcs:
            lp.x_index[(r, *a)] = col
            col += 1
        arcs_of[r] = arcs

    ub_rows, ub_cols, ub_vals, b_ub = [], [], [], []
    eq_rows, eq_cols, eq_vals = [], [], []
    for r in inst.type_ids:
        view = reach.view(r)
        out_of: dict[tuple, list[int]] = {}
        into: dict[tuple, list[int]] = {}
        for a in arcs_of[r]:
            k = lp.x_index[(r, *a)]
            out_of.setdefault(a[0], []).append(k)
            into.setdefault(a[1], []).append(k)
        for loc, count, _ in view.starts:
            row = len(b_ub)
            for k in out_of.get(src(loc), ()):
                ub_rows.append(row), ub_cols.append(k), ub_vals.append(1.0)
            b_ub.append(count)
            lp.rows.append(("stock", r, src(loc)))
        for j in view.demands:
            row = len(lp.rows) - len(b_ub)
            for k in into.get(dem(j), ()):
                eq_rows.append(row), eq_cols.append(k), eq_vals.append(1.0)
            for k in out_of.get(dem(j), ()):
                eq_rows.append(row), eq_cols.append(k), eq_vals.append(-1.0)
            lp.rows.append(("conserve", r, dem(j)))
        for j in view.demands:
            row = len(b_ub)
            for k in into.get(dem(j), ()):
                ub_rows.append(row), ub_cols.append(k), ub_vals.append(-1.0)
            ub_rows.append(row), ub_cols.append(j), ub_vals.append(1.0)
            b_ub.append(0)
            lp.rows.append(("cover", r, dem(j)))
    nv = lp.num_vars
    n_eq = sum(1 for kind, _, _ in lp.rows if kind == "conserve")
    lp.a_ub = sparse.csr_matrix((ub_vals, (ub_rows, ub_cols)), shape=(len(b_ub), nv))
    lp.b_ub = np.array(b_ub, dtype=float)
    lp.a_eq = sparse.csr_matrix((eq_vals, (eq_rows, eq_cols)), shape=(n_eq, nv))
    lp.b_eq = np.zeros(n_eq)
    return lp


@dataclass(frozen=True)
class FractionalSolution:
    y: tuple  # per demand
    x: Mapping[tuple[str, tuple, tuple], object]  # (type, tail, head) -> value, nonzero only
    objective: object
    exact: bool = False

    def max_violation(self, lp: LpRelaxation) -> float:
        v = np.zeros(lp.num_vars)
        v[: lp.n_demands] = [float(t) for t in self.y]
        for key, val in self.x.items():
            v[lp.x_index[key]] = float(val)
        worst = max(0.0, float(-v.min(initial=0)), float(v.max(initial=0) - 1))
        if lp.a_ub.shape[0]:
            worst = max(worst, float((lp.a_ub @ v - lp.b_ub).max()))
        if lp.a_eq.shape[0]:
            worst = max(worst, float(np.abs(lp.a_eq @ v - lp.b_eq).max()))
        return worst


def _from_vector(lp: LpRelaxation, v, objective, exact: bool) -> FractionalSolution:
    y = tuple(v[: lp.n_demands])
    x = {key: v[k] for key, k in lp.x_index.items() if v[k] != 0}
    return FractionalSolution(y, x, objective, exact)


def solve_lp(lp: LpRelaxation, method: str = "highs") -> FractionalSolution:
    """Optimal vertex of the relaxation.

    ``method="highs"`` uses scipy's dual simplex (floats);
    ``method="exact"`` pivots on rationals with Bland's rule and is meant for
    small problems and cross-checks.
    """
    if lp.num_vars == 0:
        return FractionalSolution((), {}, Fraction(0) if method == "exact" else 0.0, method == "exact")
    if method == "exact":
        return _solve_exact(lp)
    if method != "highs":
        raise ValueError(f"unknown LP method {method!r}")
    res = linprog(
        -lp.objective,
        A_ub=lp.a_ub if lp.a_ub.shape[0] else None,
        b_ub=lp.b_ub if lp.a_ub.shape[0] else None,
        A_eq=lp.a_eq if lp.a_eq.shape[0] else None,
        b_eq=lp.b_eq if lp.a_eq.shape[0] else None,
        bounds=(0, 1),
        method="highs-ds",
    )
    if res.status != 0:  # pragma: no cover - the LP is always feasible and bounded
        raise RuntimeError(f"LP solver failed: {res.message}")
    v = np.clip(res.x, 0.0, 1.0)
    v[np.abs(v) < 1e-12] = 0.0
    return _from_vector(lp, [float(t) for t in v], float(-res.fun), False)


def _solve_exact(lp: LpRelaxation) -> FractionalSolution:
    """Dense tableau simplex over Fractions for max c.x, A x <= b, 0 <= x <= 1.

    Equalities become two opposite inequalities and variable upper bounds
    become rows, so every right-hand side is nonnegative and the all-slack
    basis is a feasible start.  Bland's rule rules out cycling.
    """
    nv = lp.num_vars
    rows: list[tuple[dict[int, Fraction], Fraction]] = []
    ub = lp.a_ub.tocoo()
    eq = lp.a_eq.tocoo()
    ub_rows: list[dict[int, Fraction]] = [{} for _ in range(lp.a_ub.shape[0])]
    for i, j, v in zip(ub.row, ub.col, ub.data):
        ub_rows[i][int(j)] = Fraction(int(v))
    for i, coefs in enumerate(ub_rows):
        rows.append((coefs, Fraction(int(lp.b_ub[i]))))
    eq_rows: list[dict[int, Fraction]] = [{} for _ in range(lp.a_eq.shape[0])]
    for i, j, v in zip(eq.row, eq.col, eq.data):
        eq_rows[i][int(j)] = Fraction(int(v))
    for coefs in eq_rows:
        rows.append((coefs, Fraction(0)))
        rows.append(({j: -v for j, v in coefs.items()}, Fraction(0)))
    for j in range(nv):
        rows.append(({j: Fraction(1)}, Fraction(1)))

    m = len(rows)
    width = nv + m
    tab = []
    for i, (coefs, rhs) in enumerate(rows):
        row = [Fraction(0)] * (width + 1)
        for j, v in coefs.items():
            row[j] = v
        row[nv + i] = Fraction(1)
        row[width] = rhs
        tab.append(row)
    # reduced costs for maximisation: z_j - c_j
    z = [Fraction(0)] * (width + 1)
    for j, w in enumerate(lp.rewards):
        z[j] = Fraction(-w)
    basis = [nv + i for i in range(m)]

    while True:
        enter = next((j for j in range(width) if z[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:  # pragma: no cover - every variable is bounded
            raise RuntimeError("LP unbounded")
        piv = tab[leave]
        p = piv[enter]
        if p != 1:
            piv[:] = [v / p for v in piv]
        nz = [j for j, v in enumerate(piv) if v]
        for i in range(m):
            if i != leave:
                f = tab[i][enter]
                if f:
                    row = tab[i]
                    for j in nz:
                        row[j] -= f * piv[j]
        f = z[enter]
        for j in nz:
            z[j] -= f * piv[j]
        basis[leave] = enter

    v = [Fraction(0)] * nv
    for i, b in enumerate(basis):
        if b < nv:
            v[b] = tab[i][width]
    return _from_vector(lp, v, z[width], True)


# -- flow rebounding -------------------------------------------------------------


def _is_source(node: tuple) -> bool:
    return node[0] == "s"


def _node_key(node: tuple):
    kind = {"s": 0, "d": 1, "t": 2}[node[0]]
    return (kind, str(node[1]) if kind == 0 else node[1] if kind == 1 else 0)


def total_flow(x: Mapping[Arc, Fraction]) -> Fraction:
    return sum(x.values(), Fraction(0))


def rebound_flows(
    x: Mapping[Arc, Fraction],
    arc_exists: Callable[[tuple, tuple], bool] | None = None,
    trace: list | None = None,
) -> dict[Arc, Fraction]:
    """Reroute one type's flow so no arc carries more than one unit.

    ``x`` maps arcs ``(tail, head)`` over nodes ``("s", loc)``,
    ``("d", j)`` and ``("t",)`` to flow values.  While some arc ``(i, j)``
    carries more than one unit, flow is moved off it onto the shortcut that
    skips ``i`` or ``j`` (or both), which keeps conservation, never lowers
    a demand's inflow below one, and strictly reduces total flow.  Arcs are
    picked lowest first.  ``arc_exists`` guards each shortcut and a missing
    one raises ``ValueError``, since shortcuts exist whenever travel times
    obey the triangle inequality.  ``trace`` receives the total flow after
    every step.
    """
    xb = {a: Fraction(v) for a, v in x.items() if v}

    def arc_key(a: Arc):
        return (_node_key(a[0]), _node_key(a[1]))

    def add(a: Arc, delta: Fraction) -> None:
        v = xb.get(a, Fraction(0)) + delta
        if v:
            xb[a] = v
        else:
            xb.pop(a, None)

    def shortcut(u: tuple, v: tuple) -> Arc:
        if arc_exists is not None and not arc_exists(u, v):
            raise ValueError(f"shortcut arc {u} -> {v} missing: travel times break the triangle inequality")
        return (u, v)

    def first(pred) -> Arc:
        return min((a for a, v in xb.items() if v > 0 and pred(a)), key=arc_key)

    while True:
        over = [a for a, v in xb.items() if v > 1]
        if not over:
            break
        i, j = min(over, key=arc_key)
        excess = xb[(i, j)] - 1
        if _is_source(i) and j == SINK:
            add((i, j), -excess)
        elif _is_source(i):
            jk = first(lambda a: a[0] == j)
            delta = min(excess, xb[jk])
            add((i, j), -delta), add(jk, -delta), add(shortcut(i, jk[1]), delta)
        elif j == SINK:
            hi = first(lambda a: a[1] == i)
            delta = min(excess, xb[hi])
            add(hi, -delta), add((i, j), -delta), add(shortcut(hi[0], j), delta)
        else:
            hi = first(lambda a: a[1] == i)
            jk = first(lambda a: a[0] == j)
            delta = min(excess, xb[hi], xb[jk])
            add(hi, -delta), add((i, j), -delta), add(jk, -delta)
            add(shortcut(hi[0], jk[1]), delta)
        if trace is not None:
            trace.append(total_flow(xb))
    return xb


def inflow(x: Mapping[Arc, Fraction], node: tuple) -> Fraction:
    return sum((v for (_, h), v in x.items() if h == node), Fraction(0))


def outflow(x: Mapping[Arc, Fraction], node: tuple) -> Fraction:
    return sum((v for (t, _), v in x.items() if t == node), Fraction(0))


# -- bicriteria rounding -----------------------------------------------------------


class BicriteriaError(RuntimeError):
    """The kept demands could not be routed: the instance is not as satisfiable as assumed."""


@dataclass
class BicriteriaResult:
    solution: Solution
    lp: FractionalSolution
    good: frozenset[int]
    factor: Fraction  # 1 - k*eps
    stocks_allowed: dict[tuple[str, str], int]
    stocks_used: dict[tuple[str, str], int]
    bounded_flows: dict[str, dict[Arc, Fraction]]
    base_stocks: dict[tuple[str, str], int] = field(default_factory=dict)

    @property
    def objective(self) -> int:
        return self.solution.objective

    @property
    def added_resources(self) -> int:
        return sum(self.stocks_allowed.values()) - sum(self.base_stocks.values())


def inflated_stocks(inst: Instance, factor: Fraction) -> dict[tuple[str, str], int]:
    return {(t.id, loc): math.ceil(Fraction(c) / factor) for t in inst.types for loc, c in t.starts}


def _type_arc_checker(reach: ReachabilityData, r: str):
    view = reach.view(r)
    first = {loc: set(reach_) for loc, _, reach_ in view.starts}
    succ = {i: set(v) for i, v in view.succ.items()}
    members = set(view.demands)

    def ok(u: tuple, v: tuple) -> bool:
        if v == SINK:  # a start-to-sink arc is an idle unit
            return u[0] == "s" or u[1] in members
        if u[0] == "s":
            return v[1] in first.get(u[1], ())
        return v[1] in succ.get(u[1], ())

    return ok


def _exact_type_flow(
    inst: Instance, reach: ReachabilityData, r: str, good: frozenset[int], factor: Fraction
) -> dict[Arc, Fraction] | None:
    """A rational flow for type ``r`` with inflow at least ``factor`` on kept demands.

    Scaling by the denominator ``q`` of ``factor`` turns the search into an
    integral flow problem (arc capacity ``q``, stock ``q*l``, node lower bound
    ``factor*q``); any fractional point of the relaxation witnesses that it is
    feasible, so an integral one exists.
    """
    q = factor.denominator
    lo = factor.numerator
    view = reach.view(r)
    net = FlowNetwork()
    supply = q * view.stock
    s_star = net.add_node("s*", supply)
    t = net.add_node("t", -supply)
    net.add_arc(s_star, t, None)
    node_of: dict[tuple, int] = {}
    arcs: list[Arc] = []
    for loc, count, _ in view.starts:
        node_of[src(loc)] = net.add_node(src(loc))
        net.add_arc(s_star, node_of[src(loc)], q * count)
    for j in view.demands:
        node_of[dem(j)] = net.add_node(dem(j))
        if j in good:
            net.set_node_capacity(node_of[dem(j)], lo, None)
    node_of[SINK] = t
    for loc, _, first in view.starts:
        arcs += [(src(loc), dem(j)) for j in first]
    for i in view.demands:
        arcs += [(dem(i), dem(j)) for j in view.succ.get(i, ())]
    arcs += [(dem(j), SINK) for j in view.demands]
    first_arc = len(net.arcs)
    for u, v in arcs:
        net.add_arc(node_of[u], node_of[v], q)
    sol = solve_min_cost_flow(net)
    if not sol.feasible:
        return None
    return {a: Fraction(sol.flow[first_arc + k], q) for k, a in enumerate(arcs) if sol.flow[first_arc + k]}


def _lp_type_flow(frac: FractionalSolution, r: str) -> dict[Arc, Fraction]:
    return {(u, v): Fraction(val) for (rr, u, v), val in frac.x.items() if rr == r}


def run_bicriteria(
    inst: Instance,
    reach: ReachabilityData,
    k: int,
    eps,
    lp_method: str = "highs",
) -> BicriteriaResult:
    """Round the LP optimum: keep demands with LP value at least ``1 - k*eps`` and route them
    with stocks inflated to ``ceil(l / (1 - k*eps))``.
    """
    eps = Fraction(str(eps)) if isinstance(eps, float) else Fraction(eps)
    if k < 1 or eps <= 0:
        raise ValueError("need k >= 1 and eps > 0")
    factor = 1 - k * eps
    if factor <= 0:
        raise ValueError(f"k*eps = {k * eps} must be below 1")
    lp = build_lp_relaxation(inst, reach)
    frac = solve_lp(lp, lp_method)
    if frac.exact:
        good = frozenset(j for j, v in enumerate(frac.y) if v >= factor)
    else:
        cut = float(factor) - THRESHOLD_SLACK
        good = frozenset(j for j, v in enumerate(frac.y) if v >= cut)

    bounded: dict[str, dict[Arc, Fraction]] = {}
    for r in inst.type_ids:
        if frac.exact:
            flow = _lp_type_flow(frac, r)
        else:
            flow = _exact_type_flow(inst, reach, r, good, factor)
            if flow is None:
                raise BicriteriaError(f"type {r}: kept demands admit no flow at level {factor}")
        scaled = {a: v / factor for a, v in flow.items()}
        bounded[r] = rebound_flows(scaled, _type_arc_checker(reach, r))

    allowed = inflated_stocks(inst, factor)
    big = inst.with_stocks(allowed)
    res = evaluate_fixed_y(big, build_reachability(big), good)
    if not res.feasible:
        raise BicriteriaError("kept demands are not routable with the inflated stocks")
    used: dict[tuple[str, str], int] = {key: 0 for key in allowed}
    for p in res.solution.paths:
        if p.demands:
            used[(p.type, p.start_location)] += 1
    base = {(t.id, loc): c for t in inst.types for loc, c in t.starts}
    sol = res.solution.with_certificate(f">= {k - 1}/{k}*LP, stocks <= ceil(l/({factor}))")
    return BicriteriaResult(sol, frac, good, factor, allowed, used, bounded, base)
