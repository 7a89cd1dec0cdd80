"""Shared helpers for the test suite: random instance generation and small
independent oracles kept deliberately separate from the library code."""

from __future__ import annotations

import math
import random
from fractions import Fraction
from itertools import product

from dsirs.model import Instance, Resource, cost_fits


def composition(rng: random.Random, total: int, parts: int) -> list[int]:
    """Random nonnegative integer vector of given length summing to total."""
    if parts == 1:
        return [total]
    weights = [rng.random() for _ in range(parts)]
    s = sum(weights)
    raw = [total * w / s for w in weights]
    vals = [int(v) for v in raw]
    short = total - sum(vals)
    order = sorted(range(parts), key=lambda i: raw[i] - vals[i], reverse=True)
    for i in order[:short]:
        vals[i] += 1
    return vals


def random_instance(
    rng: random.Random,
    n: int,
    max_u: int = 30,
    unsellable_rate: float = 0.1,
    budget: int | float | None = None,
) -> Instance:
    """Valid random instance: equal utility totals, prices under the cap."""
    u1 = [rng.randint(0, max_u) for _ in range(n)]
    total = sum(u1)
    u2 = composition(rng, total, n) if total > 0 else [0] * n
    resources = []
    for i in range(n):
        cap = max(u1[i], u2[i])
        p = rng.randint(0, cap) if cap > 0 else 0
        c = math.inf if rng.random() < unsellable_rate else rng.randint(0, 4)
        resources.append(Resource(f"r{i}", u1[i], u2[i], p, c))
    if budget is None:
        budget = math.inf if rng.random() < 0.15 else rng.randint(0, 8)
    return Instance(tuple(resources), budget)


def all_tripartitions(names: list[str]):
    """Yield every (s0, s1, s2) assignment of the given names."""
    for assignment in product(range(3), repeat=len(names)):
        s0, s1, s2 = [], [], []
        for name, slot in zip(names, assignment):
            (s0, s1, s2)[slot].append(name)
        yield frozenset(s0), frozenset(s1), frozenset(s2)


def exact_metrics(inst: Instance, s0, s1, s2, q: Fraction | None = None):
    """Independent welfare computation used as an oracle against the library.

    Returns (q, w1, w2, d, rho) with rho = math.inf when min(w1, w2) <= 0.
    """
    by_name = {r.name: r for r in inst.resources}
    U1 = sum(by_name[x].u1 for x in s1)
    U2 = sum(by_name[x].u2 for x in s2)
    P = sum(by_name[x].p for x in s0)
    if q is None:
        q = Fraction(0)
        if P > 0:
            q = min(Fraction(1), max(Fraction(0), Fraction(P - U1 + U2, 2 * P)))
    w1 = U1 + q * P
    w2 = U2 + (1 - q) * P
    d = abs(w1 - w2)
    rho = max(w1, w2) / min(w1, w2) if w1 > 0 and w2 > 0 else math.inf
    return q, w1, w2, d, rho


def sale_fits(inst: Instance, s0) -> bool:
    by_name = {r.name: r for r in inst.resources}
    cost = 0
    for x in s0:
        cost += by_name[x].c
    return cost_fits(cost, inst.budget)
