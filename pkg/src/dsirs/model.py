"""Instance and plan model.

Defines resources, instances, plans and welfare reports, and the exact
metric computations every solver builds on: the balancing revenue share q,
per-agent welfares, the difference and ratio metrics, envy, feasibility and
Pareto filtering.

All arithmetic here is exact. Welfares are rationals whose denominator
divides 2*p(S0); floating point never enters the metric path. The only
non-integer scalar is the "unsellable" cost sentinel, which compares
greater than every finite budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Union

from .errors import (
    DuplicateName,
    EmptyInput,
    NegativeValue,
    NotAPartition,
    PriceExceedsMaxUtility,
    UnequalTotals,
    ValidationError,
)

# Cost value for resources that cannot be sold. Fails every budget check.
UNSELLABLE = math.inf

Cost = Union[int, float]


@dataclass(frozen=True)
class Resource:
    """One indivisible resource with both agents' utilities, sale price and cost."""

    name: str
    u1: int
    u2: int
    p: int
    c: Cost = 0


@dataclass(frozen=True)
class Instance:
    """An ordered set of resources plus the sale budget B (int or inf)."""

    resources: tuple[Resource, ...]
    budget: Cost = UNSELLABLE

    @property
    def n(self) -> int:
        return len(self.resources)

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.resources)


@dataclass(frozen=True)
class Plan:
    """Tripartition of the resources: s0 sold, s1 to Agent 1, s2 to Agent 2.

    q is the fraction of sale revenue paid to Agent 1, always an exact
    rational in [0, 1]. q_pinned marks a caller-supplied q; otherwise q is
    the derived balancing share of revenue_share().
    """

    s0: frozenset[str]
    s1: frozenset[str]
    s2: frozenset[str]
    q: Fraction
    q_pinned: bool = False


@dataclass(frozen=True)
class WelfareReport:
    """Exact metrics of one plan: welfares, d, rho, envies, feasibility."""

    w1: Fraction
    w2: Fraction
    d: Fraction
    rho: Union[Fraction, float]
    envy1: Fraction
    envy2: Fraction
    feasible: bool


# Audit counters for the d = 0 <=> rho = 1 equivalence. Every welfare
# evaluation with both welfares positive checks the equivalence; violations
# are counted and raised so the whole test suite doubles as a property check.
_AUDIT = {"evaluations": 0, "violations": 0}


def audit_counters() -> dict:
    return dict(_AUDIT)


def reset_audit_counters() -> None:
    _AUDIT["evaluations"] = 0
    _AUDIT["violations"] = 0


def cost_fits(cost: Cost, budget: Cost) -> bool:
    """True iff a sale of total cost `cost` is payable from `budget`.

    The unsellable sentinel exceeds every budget, including an unlimited one.
    """
    if cost == UNSELLABLE:
        return False
    return cost <= budget


def _check_nonneg_int(value, what: str):
    if isinstance(value, bool) or not isinstance(value, int):
        raise NegativeValue(f"{what} must be a nonnegative integer, got {value!r}")
    if value < 0:
        raise NegativeValue(f"{what} must be nonnegative, got {value}")


def _check_cost(value, what: str):
    if value == UNSELLABLE and isinstance(value, float):
        return
    _check_nonneg_int(value, what)


def validate_instance(raw) -> Instance:
    """Check every instance invariant and return the instance.

    Accepts an Instance or a plain dict in the file schema. Raises
    UnequalTotals, PriceExceedsMaxUtility, NegativeValue or DuplicateName.
    """
    inst = instance_from_dict(raw) if isinstance(raw, dict) else raw
    seen = set()
    for r in inst.resources:
        if r.name in seen:
            raise DuplicateName(f"duplicate resource name {r.name!r}")
        seen.add(r.name)
        _check_nonneg_int(r.u1, f"u1({r.name})")
        _check_nonneg_int(r.u2, f"u2({r.name})")
        _check_nonneg_int(r.p, f"p({r.name})")
        _check_cost(r.c, f"c({r.name})")
        if r.p > max(r.u1, r.u2):
            raise PriceExceedsMaxUtility(
                f"p({r.name}) = {r.p} exceeds max(u1, u2) = {max(r.u1, r.u2)}"
            )
    _check_cost(inst.budget, "budget")
    t1 = sum(r.u1 for r in inst.resources)
    t2 = sum(r.u2 for r in inst.resources)
    if t1 != t2:
        raise UnequalTotals(f"utility totals differ: {t1} vs {t2}")
    return inst


def instance_from_dict(data: dict) -> Instance:
    try:
        budget = data["budget"]
        rows = data["resources"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"missing instance field: {exc}") from exc
    if budget == "inf":
        budget = UNSELLABLE
    resources = []
    for row in rows:
        try:
            c = row.get("c", 0)
            if c == "inf":
                c = UNSELLABLE
            resources.append(
                Resource(name=str(row["name"]), u1=row["u1"], u2=row["u2"], p=row["p"], c=c)
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed resource entry {row!r}: {exc}") from exc
    return Instance(resources=tuple(resources), budget=budget)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "budget": "inf" if inst.budget == UNSELLABLE else inst.budget,
        "resources": [
            {
                "name": r.name,
                "u1": r.u1,
                "u2": r.u2,
                "p": r.p,
                "c": "inf" if r.c == UNSELLABLE else r.c,
            }
            for r in inst.resources
        ],
    }


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_instance(json.load(fh))


@lru_cache(maxsize=None)
def _index(inst: Instance) -> dict:
    return {r.name: r for r in inst.resources}


def _resolve(inst: Instance, names: Iterable[str]) -> list[Resource]:
    idx = _index(inst)
    try:
        return [idx[name] for name in names]
    except KeyError as exc:
        raise NotAPartition(f"unknown resource {exc.args[0]!r}") from exc


def _check_partition(inst: Instance, s0, s1, s2):
    s0, s1, s2 = frozenset(s0), frozenset(s1), frozenset(s2)
    universe = frozenset(_index(inst))
    if s0 | s1 | s2 != universe or len(s0) + len(s1) + len(s2) != len(universe):
        raise NotAPartition(
            "s0, s1, s2 must be disjoint and together cover every resource"
        )
    return s0, s1, s2


def _sums(inst: Instance, s0, s1, s2) -> tuple[int, int, int, Cost]:
    """Return (u1(s1), u2(s2), p(s0), c(s0)) for a name tripartition."""
    idx = _index(inst)
    u1 = sum(idx[name].u1 for name in s1)
    u2 = sum(idx[name].u2 for name in s2)
    p = sum(idx[name].p for name in s0)
    cost: Cost = 0
    for name in s0:
        cost += idx[name].c
    return u1, u2, p, cost


def revenue_share(s0, s1, s2, inst: Instance) -> Fraction:
    """Balancing revenue share q for a tripartition.

    q = clamp((p(S0) - u1(S1) + u2(S2)) / (2 p(S0))) to [0, 1]; by
    convention q = 0 when p(S0) = 0, where every q gives identical welfares.
    """
    s0, s1, s2 = _check_partition(inst, s0, s1, s2)
    u1, u2, p, _ = _sums(inst, s0, s1, s2)
    if p == 0:
        return Fraction(0)
    qn = p - u1 + u2
    if qn <= 0:
        return Fraction(0)
    if qn >= 2 * p:
        return Fraction(1)
    return Fraction(qn, 2 * p)


def derived_plan(s0, s1, s2, inst: Instance) -> Plan:
    """Plan with the derived (unpinned) revenue share."""
    q = revenue_share(s0, s1, s2, inst)
    return Plan(frozenset(s0), frozenset(s1), frozenset(s2), q, q_pinned=False)


def pinned_plan(s0, s1, s2, q: Fraction, inst: Instance) -> Plan:
    """Plan with a caller-supplied revenue share q in [0, 1]."""
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValidationError(f"pinned q must lie in [0, 1], got {q}")
    s0, s1, s2 = _check_partition(inst, s0, s1, s2)
    return Plan(s0, s1, s2, q, q_pinned=True)


def welfare(plan: Plan, inst: Instance) -> WelfareReport:
    """Evaluate a plan exactly.

    w1 = u1(S1) + q p(S0), w2 = u2(S2) + (1-q) p(S0); d = |w1 - w2|;
    rho = max(w1/w2, w2/w1) or +inf when min(w1, w2) <= 0; envies against
    the mirrored plan; feasible iff both welfares positive and c(S0) <= B.
    """
    s0, s1, s2 = _check_partition(inst, plan.s0, plan.s1, plan.s2)
    u1, u2, p, cost = _sums(inst, s0, s1, s2)
    q = plan.q
    w1 = u1 + q * p
    w2 = u2 + (1 - q) * p
    d = abs(w1 - w2)
    if w1 > 0 and w2 > 0:
        rho: Union[Fraction, float] = max(w1, w2) / min(w1, w2)
    else:
        rho = math.inf

    # mirrored plan: bundles swapped, revenue share 1 - q
    idx = _index(inst)
    mirror_w1 = sum(idx[name].u1 for name in s2) + (1 - q) * p
    mirror_w2 = sum(idx[name].u2 for name in s1) + q * p
    envy1 = mirror_w1 - w1
    envy2 = mirror_w2 - w2

    feasible = w1 > 0 and w2 > 0 and cost_fits(cost, inst.budget)

    _AUDIT["evaluations"] += 1
    if w1 > 0 and w2 > 0 and (d == 0) != (rho == 1):
        _AUDIT["violations"] += 1
        raise AssertionError(
            f"metric equivalence violated: d = {d}, rho = {rho} on plan {plan}"
        )

    return WelfareReport(
        w1=Fraction(w1),
        w2=Fraction(w2),
        d=Fraction(d),
        rho=rho,
        envy1=Fraction(envy1),
        envy2=Fraction(envy2),
        feasible=feasible,
    )


def envy(plan: Plan, inst: Instance) -> tuple[Fraction, Fraction, bool]:
    """Envies of both agents and whether the plan is envy-free.

    Agent i envies when it would be better off under the mirrored plan
    (bundles swapped, revenue share 1 - q). Envy-free iff both envies <= 0.
    """
    report = welfare(plan, inst)
    return report.envy1, report.envy2, report.envy1 <= 0 and report.envy2 <= 0


def plan_sort_key(plan: Plan):
    """Canonical ordering key so repeated runs report identical plan lists."""
    return (
        tuple(sorted(plan.s0)),
        tuple(sorted(plan.s1)),
        tuple(sorted(plan.s2)),
        plan.q,
        plan.q_pinned,
    )


def plan_to_dict(plan: Plan) -> dict:
    return {
        "s0": sorted(plan.s0),
        "s1": sorted(plan.s1),
        "s2": sorted(plan.s2),
        "q": f"{plan.q.numerator}/{plan.q.denominator}",
    }


def pareto_filter(plans: list[Plan], inst: Instance) -> list[Plan]:
    """Drop plans strictly welfare-dominated by another input plan.

    Plans with identical (w1, w2) are all retained; output is canonically
    sorted. Raises EmptyInput on an empty list.
    """
    if not plans:
        raise EmptyInput("pareto_filter needs at least one plan")
    scored = [(welfare(p, inst), p) for p in plans]
    kept = []
    for rep, plan in scored:
        dominated = any(
            (other.w1 >= rep.w1 and other.w2 >= rep.w2)
            and (other.w1 > rep.w1 or other.w2 > rep.w2)
            for other, _ in scored
        )
        if not dominated:
            kept.append(plan)
    return sorted(set(kept), key=plan_sort_key)


def sale_cost(inst: Instance, s0: Iterable[str]) -> Cost:
    cost: Cost = 0
    idx = _index(inst)
    for name in s0:
        cost += idx[name].c
    return cost


def total_u1(inst: Instance) -> int:
    return sum(r.u1 for r in inst.resources)


def total_u2(inst: Instance) -> int:
    return sum(r.u2 for r in inst.resources)
