"""Classic Adjusted Winner and its split-free variant.

classic_aw runs the textbook two-phase procedure, allowing one fractional
split, and is kept as a reference implementation. aw_subplan runs the same
phases on the unsold resources but never splits: it halts before a split
would occur, or as soon as the sale revenue can cover the welfare gap, and
aw_derived_plan wraps the result as a Plan with the derived revenue share.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from .errors import ZeroTotalUtility
from .model import Instance, Plan, derived_plan

HALT_SPLIT = "split-guard"
HALT_REVENUE = "revenue-guard"
HALT_EQUALITY = "equality"


@dataclass(frozen=True)
class RatioOrder:
    """Transfer order for the advantaged agent `direction` (1 or 2):
    non-decreasing u_source/u_target, zero targets last, index tiebreak."""

    order: tuple[str, ...]
    direction: int


@dataclass(frozen=True)
class ClassicAwOutcome:
    """Result of classic Adjusted Winner. The split resource, when present,
    is listed in the advantaged agent's bundle with the retained fraction."""

    s1: frozenset[str]
    s2: frozenset[str]
    split: Optional[tuple[str, Fraction]]
    w1: Fraction
    w2: Fraction
    transfers: tuple[str, ...]


def ratio_order(inst: Instance, direction: int) -> RatioOrder:
    """Order all resources for transfers away from the given agent."""

    def key(item):
        i, r = item
        ua, ub = (r.u1, r.u2) if direction == 1 else (r.u2, r.u1)
        if ub == 0:
            return (1, Fraction(0), i)
        return (0, Fraction(ua, ub), i)

    ranked = sorted(enumerate(inst.resources), key=key)
    return RatioOrder(tuple(r.name for _, r in ranked), direction)


@lru_cache(maxsize=None)
def _aw_context(inst: Instance):
    by_name = {r.name: r for r in inst.resources}
    phase1_to_1 = frozenset(r.name for r in inst.resources if r.u1 > r.u2)
    orders = {1: ratio_order(inst, 1).order, 2: ratio_order(inst, 2).order}
    return by_name, phase1_to_1, orders


def classic_aw(inst: Instance) -> ClassicAwOutcome:
    """Textbook Adjusted Winner over utilities alone (prices, costs and the
    budget play no role). Allocates each resource to its higher valuer, ties
    to Agent 2, then transfers whole resources from the advantaged agent in
    ratio order, splitting the last one fractionally when needed."""
    by_name, to_one, orders = _aw_context(inst)
    if all(r.u1 == 0 and r.u2 == 0 for r in inst.resources):
        raise ZeroTotalUtility("both agents value every resource at zero")

    s1 = set(to_one)
    s2 = set(by_name) - s1
    w1 = Fraction(sum(by_name[x].u1 for x in s1))
    w2 = Fraction(sum(by_name[x].u2 for x in s2))
    transfers: list[str] = []

    if w1 == w2:
        return ClassicAwOutcome(frozenset(s1), frozenset(s2), None, w1, w2, ())

    direction = 1 if w1 > w2 else 2
    src, dst = (s1, s2) if direction == 1 else (s2, s1)
    for name in orders[direction]:
        if name not in src:
            continue
        wa, wb = (w1, w2) if direction == 1 else (w2, w1)
        if wa == wb:
            break
        r = by_name[name]
        ua, ub = (r.u1, r.u2) if direction == 1 else (r.u2, r.u1)
        if wa - ua >= wb + ub:
            src.remove(name)
            dst.add(name)
            transfers.append(name)
            if direction == 1:
                w1, w2 = wa - ua, wb + ub
            else:
                w2, w1 = wa - ua, wb + ub
            continue
        # whole transfer overshoots: split this resource, advantaged side
        # keeps fraction f
        t = (wa - wb) / (ua + ub)
        equal = wa - t * ua
        return ClassicAwOutcome(
            frozenset(s1),
            frozenset(s2),
            (name, 1 - t),
            equal,
            equal,
            tuple(transfers),
        )
    assert w1 == w2, "transfer loop must end in exact equality"
    return ClassicAwOutcome(frozenset(s1), frozenset(s2), None, w1, w2, tuple(transfers))


def aw_subplan(s0: Iterable[str], inst: Instance) -> tuple[frozenset, frozenset, str]:
    """Split-free Adjusted Winner over the unsold resources.

    Returns (g1, g2, halted_by). Halting checks run before every transfer,
    in order: exact equality; revenue guard |u1(g1) - u2(g2)| <= p(s0);
    split guard when the next whole transfer would flip which agent is
    advantaged (the resource then stays with its current owner).
    """
    by_name, to_one, orders = _aw_context(inst)
    sold = frozenset(s0)
    g1 = {x for x in by_name if x not in sold and x in to_one}
    g2 = {x for x in by_name if x not in sold and x not in to_one}
    w1 = sum(by_name[x].u1 for x in g1)
    w2 = sum(by_name[x].u2 for x in g2)
    revenue = sum(by_name[x].p for x in sold)

    gap = w1 - w2
    if gap == 0:
        return frozenset(g1), frozenset(g2), HALT_EQUALITY
    if abs(gap) <= revenue:
        return frozenset(g1), frozenset(g2), HALT_REVENUE

    direction = 1 if gap > 0 else 2
    src, dst = (g1, g2) if direction == 1 else (g2, g1)
    for name in orders[direction]:
        if name not in src:
            continue
        wa, wb = (w1, w2) if direction == 1 else (w2, w1)
        r = by_name[name]
        ua, ub = (r.u1, r.u2) if direction == 1 else (r.u2, r.u1)
        if wa - ua < wb + ub:
            return frozenset(g1), frozenset(g2), HALT_SPLIT
        src.remove(name)
        dst.add(name)
        if direction == 1:
            w1, w2 = wa - ua, wb + ub
        else:
            w2, w1 = wa - ua, wb + ub
        gap = w1 - w2
        if gap == 0:
            return frozenset(g1), frozenset(g2), HALT_EQUALITY
        if abs(gap) <= revenue:
            return frozenset(g1), frozenset(g2), HALT_REVENUE
    assert abs(gap) <= revenue or gap == 0
    return frozenset(g1), frozenset(g2), HALT_EQUALITY


def aw_derived_plan(s0: Iterable[str], inst: Instance) -> Plan:
    """Plan built from aw_subplan with the derived revenue share."""
    g1, g2, _ = aw_subplan(s0, inst)
    return derived_plan(frozenset(s0), g1, g2, inst)
