"""Sparse five-dimensional dynamic program over scaled values.

States are keyed by (resources considered, number sold, scaled Agent 1
utility, scaled Agent 2 utility, scaled revenue); each key stores only the
lowest-cost partition reaching it. Resources are processed in descending
u1/u2 ratio order and a transfer window constrains which side of the
boundary may keep resources, one boundary index per transfer direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import cost_fits
from .scaling import ScaledInstance

ONE_TO_TWO = "one-to-two"
TWO_TO_ONE = "two-to-one"


@dataclass(frozen=True)
class DpKey:
    i: int
    o: int
    su1: int
    su2: int
    sp: int


@dataclass(frozen=True)
class DpEntry:
    s0: frozenset[str]
    s1: frozenset[str]
    s2: frozenset[str]
    cost: int


@dataclass(frozen=True)
class TransferWindow:
    """Boundary indices into the ratio order, one active per direction."""

    i_left: int
    i_right: int
    direction: str

    def __post_init__(self):
        if self.direction not in (ONE_TO_TWO, TWO_TO_ONE):
            raise ValueError(f"unknown direction {self.direction!r}")
        if not 0 <= self.i_left <= self.i_right:
            raise ValueError("window indices must satisfy 0 <= left <= right")

    @property
    def boundary(self) -> int:
        return self.i_left if self.direction == ONE_TO_TWO else self.i_right


def dp_order(resources) -> tuple[int, ...]:
    """Indices in descending u1/u2 order, ties by index increasing.

    Resources Agent 2 values at zero (ratio +inf) come first; resources
    both agents value at zero have no ratio and go last.
    """

    def key(ix):
        r = resources[ix]
        if r.u2 == 0:
            bucket = 2 if r.u1 == 0 else 0
            return (bucket, Fraction(0), ix)
        return (1, -Fraction(r.u1, r.u2), ix)

    return tuple(sorted(range(len(resources)), key=key))


def default_assignment(resources) -> tuple[frozenset[str], frozenset[str]]:
    """Ties side with Agent 2, matching the allocation phase's tie rule."""
    a1 = frozenset(r.name for r in resources if r.u1 > r.u2)
    a2 = frozenset(r.name for r in resources if r.u1 <= r.u2)
    return a1, a2


def dp_solve(
    scaled: ScaledInstance,
    window: TransferWindow,
    budget,
    assignment: Optional[tuple[frozenset[str], frozenset[str]]] = None,
) -> list[tuple[DpKey, DpEntry]]:
    """All lowest-cost terminal states reachable under the window.

    Each resource, taken in ratio order, is either sold (if the added cost
    still fits the budget), kept by Agent 1, or kept by Agent 2; the window
    direction decides which side may keep resources across the boundary.
    An empty result means no feasible completion exists under this window.
    """
    resources = scaled.resources
    n = len(resources)
    if window.boundary > n:
        raise ValueError("window boundary exceeds resource count")
    if assignment is None:
        a1, a2 = default_assignment(resources)
    else:
        a1, a2 = assignment
    order = dp_order(resources)
    empty = frozenset()
    # key -> (cost, s0, s1, s2), lowest cost kept, first writer wins ties
    layer = {(0, 0, 0, 0): (0, empty, empty, empty)}
    b = window.boundary
    to_two = window.direction == ONE_TO_TWO
    for pos, ix in enumerate(order, start=1):
        r = resources[ix]
        su1_r = scaled.u1_scaled[ix]
        su2_r = scaled.u2_scaled[ix]
        sp_r = scaled.p_scaled_down[ix]
        if to_two:
            may_keep1 = r.name in a1 and pos <= b
            may_keep2 = r.name in a2 or pos >= b
        else:
            may_keep1 = r.name in a1 or pos <= b
            may_keep2 = r.name in a2 and pos >= b
        may_keep1 = may_keep1 and su1_r != math.inf
        may_keep2 = may_keep2 and su2_r != -math.inf
        may_sell = sp_r != -math.inf
        nxt = {}

        def offer(key, value):
            old = nxt.get(key)
            if old is None or value[0] < old[0]:
                nxt[key] = value

        for (o, su1, su2, sp), (cost, s0, s1, s2) in layer.items():
            if may_keep1:
                offer((o, su1 + su1_r, su2, sp), (cost, s0, s1 | {r.name}, s2))
            if may_keep2:
                offer((o, su1, su2 + su2_r, sp), (cost, s0, s1, s2 | {r.name}))
            if may_sell:
                c2 = cost + r.c
                if cost_fits(c2, budget):
                    offer((o + 1, su1, su2, sp + sp_r),
                          (c2, s0 | {r.name}, s1, s2))
        layer = nxt
    result = []
    for (o, su1, su2, sp), (cost, s0, s1, s2) in sorted(layer.items()):
        result.append((DpKey(n, o, su1, su2, sp), DpEntry(s0, s1, s2, cost)))
    return result
