"""Exhaustive exact solvers.

solve_awns_exact enumerates every affordable sale set and evaluates its
AW-derived plan; oracle_best_plan enumerates every tripartition outright.
Both keep all optima, Pareto-filter them and report a canonically sorted
plan list, so results are deterministic ground truth for the approximate
solver and the property tests.

Internally both work on doubled integer welfares (2*W1 = 2*u1(S1) + qn,
2*W2 = 2*u2(S2) + 2*p(S0) - qn with qn = clamp(p - u1 + u2, 0, 2p)), so no
rational arithmetic happens inside the enumeration loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Optional, Union

from .adjusted_winner import aw_subplan
from .errors import Infeasible, InstanceTooLarge, ValidationError
from .model import (
    Cost,
    Instance,
    Plan,
    cost_fits,
    derived_plan,
    pareto_filter,
    pinned_plan,
    plan_sort_key,
    welfare,
)

KINDS = ("min-d", "min-rho", "min-cost-given-d", "min-cost-given-rho", "max-nash")
ORACLE_CRITERIA = ("min-d", "min-rho", "exists-envy-free", "max-nash")

EXACT_CAP = 20
ORACLE_CAP = 15


@dataclass(frozen=True)
class Objective:
    kind: str
    threshold: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown objective kind {self.kind!r}")
        constrained = self.kind in ("min-cost-given-d", "min-cost-given-rho")
        if constrained and self.threshold is None:
            raise ValidationError(f"{self.kind} needs a threshold")
        if not constrained and self.threshold is not None:
            raise ValidationError(f"{self.kind} takes no threshold")
        if self.kind == "min-cost-given-d" and self.threshold < 0:
            raise ValidationError("d threshold must be >= 0")
        if self.kind == "min-cost-given-rho" and self.threshold < 1:
            raise ValidationError("rho threshold must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    plans: list[Plan]
    objective: Fraction
    cost: Cost
    solver: str
    epsilon: Optional[Fraction] = None


@dataclass(frozen=True)
class EnvyFreeReport:
    exists: bool
    plans: list[Plan]
    solver: str = "oracle"


def _doubled_welfares(u1: int, u2: int, p: int) -> tuple[int, int]:
    qn = min(max(p - u1 + u2, 0), 2 * p)
    return 2 * u1 + qn, 2 * u2 + 2 * p - qn


def _rho_less(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Compare two ratios given as (max, min) positive integer pairs.
    Returns -1, 0 or 1."""
    left = a[0] * b[1]
    right = b[0] * a[1]
    return (left > right) - (left < right)


class _Best:
    """Running minimum with tie collection under an integer comparison key."""

    def __init__(self, compare):
        self.compare = compare
        self.key = None
        self.items = []

    def offer(self, key, item):
        if self.key is None:
            self.key, self.items = key, [item]
            return
        c = self.compare(key, self.key)
        if c < 0:
            self.key, self.items = key, [item]
        elif c == 0:
            self.items.append(item)


def _cmp_scalar(a, b) -> int:
    return (a > b) - (a < b)


def _finalize(inst: Instance, best: _Best, objective_value, solver: str) -> SolveResult:
    plans = [derived_plan(s0, s1, s2, inst) for s0, s1, s2 in best.items]
    plans = pareto_filter(plans, inst)
    plans.sort(key=plan_sort_key)
    first_cost: Cost = 0
    for name in plans[0].s0:
        first_cost += _by_name(inst)[name].c
    return SolveResult(plans=plans, objective=objective_value, cost=first_cost, solver=solver)


def _by_name(inst: Instance):
    return {r.name: r for r in inst.resources}


def solve_awns_exact(inst: Instance, objective: Objective, cap: int = EXACT_CAP) -> SolveResult:
    """Optimal AW-derived plan over all affordable sale sets.

    Sale sets are enumerated by increasing cardinality, lexicographic within
    one cardinality. Only feasible plans count; constrained variants filter
    by their threshold first and then minimize the sale cost. Raises
    Infeasible when no plan qualifies, InstanceTooLarge beyond the cap.
    """
    n = inst.n
    if n > cap:
        raise InstanceTooLarge(f"{n} resources exceed the exact solver cap {cap}")
    res = inst.resources
    kind = objective.kind

    if kind == "min-d":
        compare = _cmp_scalar  # doubled d
    elif kind == "min-rho":
        compare = _rho_less
    elif kind == "max-nash":
        compare = lambda a, b: _cmp_scalar(b, a)  # maximize product
    else:
        compare = _cmp_scalar  # cost
    best = _Best(compare)

    if kind == "min-cost-given-d":
        d2_cap = 2 * objective.threshold
    rho_thr = objective.threshold if kind == "min-cost-given-rho" else None

    for k in range(n + 1):
        for idxs in combinations(range(n), k):
            cost: Cost = 0
            for i in idxs:
                cost += res[i].c
            if not cost_fits(cost, inst.budget):
                continue
            s0 = frozenset(res[i].name for i in idxs)
            g1, g2, _ = aw_subplan(s0, inst)
            by = _by_name(inst)
            u1 = sum(by[x].u1 for x in g1)
            u2 = sum(by[x].u2 for x in g2)
            p = sum(by[x].p for x in s0)
            w1x2, w2x2 = _doubled_welfares(u1, u2, p)
            if w1x2 <= 0 or w2x2 <= 0:
                continue
            triple = (s0, g1, g2)
            if kind == "min-d":
                best.offer(abs(w1x2 - w2x2), triple)
            elif kind == "min-rho":
                best.offer((max(w1x2, w2x2), min(w1x2, w2x2)), triple)
            elif kind == "max-nash":
                best.offer(w1x2 * w2x2, triple)
            elif kind == "min-cost-given-d":
                if abs(w1x2 - w2x2) <= d2_cap:
                    best.offer(cost, triple)
            else:
                pair = (max(w1x2, w2x2), min(w1x2, w2x2))
                if pair[0] <= rho_thr * pair[1]:
                    best.offer(cost, triple)

    if best.key is None:
        raise Infeasible(f"no feasible plan satisfies objective {kind}")

    if kind == "min-d":
        value = Fraction(best.key, 2)
    elif kind == "min-rho":
        value = Fraction(best.key[0], best.key[1])
    elif kind == "max-nash":
        value = Fraction(best.key, 4)
    else:
        value = Fraction(best.key)
    return _finalize(inst, best, value, "exact-awns")


def _tripartitions(names):
    for digits in product((0, 1, 2), repeat=len(names)):
        parts = ([], [], [])
        for name, d in zip(names, digits):
            parts[d].append(name)
        yield parts


def oracle_best_plan(
    inst: Instance,
    criterion: str,
    cap: int = ORACLE_CAP,
    pinned_q_search: bool = False,
) -> Union[SolveResult, EnvyFreeReport]:
    """Optimal plan over every tripartition, or an envy-freeness report.

    All tripartitions with affordable sale sets are evaluated with the
    derived revenue share. For exists-envy-free the default checks each
    plan's own derived share; pinned_q_search additionally solves for any
    feasible share in [0, 1] making the plan envy-free.
    """
    if criterion not in ORACLE_CRITERIA:
        raise ValidationError(f"unknown oracle criterion {criterion!r}")
    n = inst.n
    if n > cap:
        raise InstanceTooLarge(f"{n} resources exceed the oracle cap {cap}")
    by = _by_name(inst)
    names = list(inst.names())

    if criterion == "exists-envy-free":
        return _envy_free_search(inst, names, by, pinned_q_search)

    if criterion == "min-d":
        best = _Best(_cmp_scalar)
    elif criterion == "min-rho":
        best = _Best(_rho_less)
    else:
        best = _Best(lambda a, b: _cmp_scalar(b, a))

    for s0, s1, s2 in _tripartitions(names):
        cost: Cost = 0
        for x in s0:
            cost += by[x].c
        if not cost_fits(cost, inst.budget):
            continue
        u1 = sum(by[x].u1 for x in s1)
        u2 = sum(by[x].u2 for x in s2)
        p = sum(by[x].p for x in s0)
        w1x2, w2x2 = _doubled_welfares(u1, u2, p)
        if w1x2 <= 0 or w2x2 <= 0:
            continue
        triple = (frozenset(s0), frozenset(s1), frozenset(s2))
        if criterion == "min-d":
            best.offer(abs(w1x2 - w2x2), triple)
        elif criterion == "min-rho":
            best.offer((max(w1x2, w2x2), min(w1x2, w2x2)), triple)
        else:
            best.offer(w1x2 * w2x2, triple)

    if best.key is None:
        raise Infeasible(f"no feasible plan exists for criterion {criterion}")
    if criterion == "min-d":
        value = Fraction(best.key, 2)
    elif criterion == "min-rho":
        value = Fraction(best.key[0], best.key[1])
    else:
        value = Fraction(best.key, 4)
    return _finalize(inst, best, value, "oracle")


def _envy_free_search(inst, names, by, pinned_q_search) -> EnvyFreeReport:
    witnesses = []
    for s0, s1, s2 in _tripartitions(names):
        cost: Cost = 0
        for x in s0:
            cost += by[x].c
        if not cost_fits(cost, inst.budget):
            continue
        u1s1 = sum(by[x].u1 for x in s1)
        u1s2 = sum(by[x].u1 for x in s2)
        u2s1 = sum(by[x].u2 for x in s1)
        u2s2 = sum(by[x].u2 for x in s2)
        p = sum(by[x].p for x in s0)

        if not pinned_q_search:
            plan = derived_plan(s0, s1, s2, inst)
            rep = welfare(plan, inst)
            if rep.feasible and rep.envy1 <= 0 and rep.envy2 <= 0:
                witnesses.append(plan)
            continue

        q = _envy_free_share(u1s1, u1s2, u2s1, u2s2, p)
        if q is not None:
            plan = pinned_plan(s0, s1, s2, q, inst)
            rep = welfare(plan, inst)
            assert rep.feasible and rep.envy1 <= 0 and rep.envy2 <= 0
            witnesses.append(plan)

    witnesses.sort(key=plan_sort_key)
    return EnvyFreeReport(exists=bool(witnesses), plans=witnesses)


def _envy_free_share(u1s1, u1s2, u2s1, u2s2, p) -> Optional[Fraction]:
    """Some q in [0, 1] making the plan envy-free with positive welfares,
    or None. Envy-freeness pins q between (p - d1)/2p and (p + d2)/2p where
    d1 = u1(s1) - u1(s2) and d2 = u2(s2) - u2(s1)."""
    if p == 0:
        if u1s2 <= u1s1 and u2s1 <= u2s2 and u1s1 > 0 and u2s2 > 0:
            return Fraction(0)
        return None
    lo = max(Fraction(p - (u1s1 - u1s2), 2 * p), Fraction(0))
    hi = min(Fraction(p + (u2s2 - u2s1), 2 * p), Fraction(1))
    if lo > hi:
        return None
    # strict welfare positivity: q > 0 when u1(s1) = 0, q < 1 when u2(s2) = 0
    strict_lo = u1s1 == 0
    strict_hi = u2s2 == 0
    if lo == hi:
        if (strict_lo and lo == 0) or (strict_hi and hi == 1):
            return None
        return lo
    candidate = lo if not (strict_lo and lo == 0) else (lo + hi) / 2
    if strict_hi and candidate == 1:
        candidate = (lo + hi) / 2
    return candidate
