"""0/1 knapsack with value scaling, the Agent-2 subproblem built on it,
and detection of a welfare-dominating resource.

o2_value answers: given a resource subset where every item is either handed
to Agent 2 or sold with all revenue going to Agent 2, what is Agent 2's
best achievable welfare under the sale budget? Selling r trades u2(r) for
p(r), so the selection problem is a knapsack over net gains p - u2 with
weights c. A resource whose u1 exceeds twice that optimum for the rest of
the instance dominates every plan; at most one such resource can exist.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional

from .model import Instance, Resource


def _to_eps(eps) -> Fraction:
    if isinstance(eps, float):
        eps = Fraction(str(eps))
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return eps


def knapsack_fptas(items: list[tuple[int, int]], capacity, eps) -> list[int]:
    """Indices of a subset with weight <= capacity and value >= (1-eps) opt.

    Classical value-scaling scheme: profits are floored to v // K with
    K = eps * vmax / n, then a min-weight-per-value table is filled exactly.
    When K <= 1 the run is exact.
    """
    eps = _to_eps(eps)
    usable = [
        (i, v, w)
        for i, (v, w) in enumerate(items)
        if v > 0 and w != math.inf and w <= capacity
    ]
    if not usable:
        return []
    vmax = max(v for _, v, _ in usable)
    k = eps * vmax / len(usable)
    if k > 1:
        scaled = [(i, int(Fraction(v) / k), w) for i, v, w in usable]
        scaled = [(i, v, w) for i, v, w in scaled if v > 0]
    else:
        scaled = usable
    if not scaled:
        # every profit scaled to zero; any single affordable item is optimal
        # within the guarantee, pick the cheapest most valuable one
        best = max(usable, key=lambda t: (t[1], -t[2]))
        return [best[0]]

    top = sum(v for _, v, _ in scaled)
    INF = math.inf
    min_weight = [0] + [INF] * top
    chosen = [0] + [0] * top  # bitmasks over scaled item positions
    for pos, (_, v, w) in enumerate(scaled):
        for value in range(top, v - 1, -1):
            prev = min_weight[value - v]
            if prev + w < min_weight[value]:
                min_weight[value] = prev + w
                chosen[value] = chosen[value - v] | (1 << pos)
    best_value = max(v for v in range(top + 1) if min_weight[v] <= capacity)
    mask = chosen[best_value]
    return [scaled[pos][0] for pos in range(len(scaled)) if mask >> pos & 1]


def o2_split(
    inst: Instance,
    subset: Iterable[str],
    budget,
    eps,
    strict_prices: bool = False,
) -> tuple[frozenset[str], int]:
    """(sale set, resulting welfare) for the sell-or-allocate choices.

    Every resource in the subset is either allocated to Agent 2 or sold with
    the full revenue credited to Agent 2. Resources with u2 >= p are always
    allocated. Sale candidates are selected by knapsack over value p - u2
    and weight c under the budget; strict_prices selects by value p instead
    (both selections are scored by the true resulting welfare).
    """
    by_name = {r.name: r for r in inst.resources}
    rs = [by_name[x] for x in subset]
    base = sum(r.u2 for r in rs)
    candidates = [r for r in rs if r.p > r.u2 and r.c != math.inf]
    if not candidates:
        return frozenset(), base
    if budget == math.inf:
        sold = frozenset(r.name for r in candidates)
        return sold, base + sum(r.p - r.u2 for r in candidates)
    values = [
        ((r.p if strict_prices else r.p - r.u2), r.c) for r in candidates
    ]
    picked = knapsack_fptas(values, budget, eps)
    sold = frozenset(candidates[i].name for i in picked)
    return sold, base + sum(candidates[i].p - candidates[i].u2 for i in picked)


def o2_value(
    inst: Instance,
    subset: Iterable[str],
    budget,
    eps,
    strict_prices: bool = False,
) -> int:
    """Approximate best welfare for Agent 2 over sell-or-allocate choices."""
    return o2_split(inst, subset, budget, eps, strict_prices)[1]


def detect_heavy_resource(inst: Instance, eps) -> Optional[Resource]:
    """The unique resource r with u1(r) > 2 * O2(rest), if any.

    O2 is the (approximate) best Agent-2 welfare over the other resources.
    Allocating everything else to Agent 2 bounds O2 from below by u2(rest),
    which screens out most candidates without a knapsack run. At most one
    resource can qualify; the scan asserts that.
    """
    total_u2 = sum(r.u2 for r in inst.resources)
    found = []
    for r in inst.resources:
        if r.u1 <= 2 * (total_u2 - r.u2):
            continue
        rest = [x.name for x in inst.resources if x.name != r.name]
        if r.u1 > 2 * o2_value(inst, rest, inst.budget, eps):
            found.append(r)
    assert len(found) <= 1, f"multiple dominating resources: {found}"
    return found[0] if found else None
