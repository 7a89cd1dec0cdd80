"""Approximation scheme for the minimum achievable welfare ratio.

Pipeline, in order:

1. Exact fast path. When the budget admits only a small number of sale
   sets, evaluate the allocation rule on every one of them. This is exact
   and covers small instances and tight budgets outright.
2. Dominant-resource cases. If some resource's u1 exceeds twice the best
   welfare Agent 2 can extract from everything else (checked in both agent
   orientations), the case analysis applies: hand it to Agent 1 and split
   the remainder by the sell-or-allocate knapsack, or sell it and recurse
   on a reduced instance carrying a zero-utility placeholder.
3. Scaled dynamic program. Per (orientation, tie side, direction, scale),
   run the window DP over scaled values. Instead of sweeping every
   boundary index separately, a one-bit "boundary passed" flag folds all
   boundary positions of a direction into a single pass, which is
   equivalent because a partition fits some boundary exactly when its last
   kept resource precedes its first transferred one. Near-minimal states
   are re-scored exactly on the original instance.

Every reported plan is scored with exact arithmetic on the original
instance; the approximation only decides which candidates are examined.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Optional

import numpy as np

from .adjusted_winner import aw_subplan
from .dp import ONE_TO_TWO, TWO_TO_ONE, dp_order
from .errors import Infeasible
from .exact import SolveResult, _Best, _doubled_welfares, _rho_less
from .knapsack import detect_heavy_resource, o2_split
from .model import (
    Instance,
    Plan,
    Resource,
    cost_fits,
    derived_plan,
    pareto_filter,
    pinned_plan,
    plan_sort_key,
    welfare,
)
from .scaling import ScaledInstance, to_eps

log = logging.getLogger(__name__)

EXACT_PATH_CAP = 4096
_PACK_BITS = 62


def _sale_sets_upto(inst: Instance, cap: int) -> Optional[list[frozenset]]:
    """Every affordable sale set, or None once more than cap exist.

    Resources nobody values and nobody pays for can never improve a plan,
    so they are pinned to the allocation side to keep the count small.
    """
    sellable = sorted(
        (
            r
            for r in inst.resources
            if r.c != math.inf
            and cost_fits(r.c, inst.budget)
            and not (r.u1 == 0 and r.u2 == 0 and r.p == 0)
        ),
        key=lambda r: (r.c, r.name),
    )
    out = [frozenset()]
    chosen: list[str] = []

    def extend(start: int, cost) -> bool:
        for j in range(start, len(sellable)):
            c2 = cost + sellable[j].c
            if not cost_fits(c2, inst.budget):
                break  # costs ascend, so nothing later fits either
            chosen.append(sellable[j].name)
            out.append(frozenset(chosen))
            ok = len(out) <= cap and extend(j + 1, c2)
            chosen.pop()
            if not ok:
                return False
        return True

    if not extend(0, 0):
        return None
    return out


def _by_name(inst: Instance):
    return {r.name: r for r in inst.resources}


def _aw_triple(inst: Instance, s0: frozenset):
    g1, g2, _ = aw_subplan(s0, inst)
    return (frozenset(s0), g1, g2)


def _mirror(inst: Instance) -> Instance:
    swapped = tuple(
        Resource(r.name, u1=r.u2, u2=r.u1, p=r.p, c=r.c) for r in inst.resources
    )
    return Instance(resources=swapped, budget=inst.budget)


def relaxed_scale(inst: Instance, m_max: int, eps_prime: Fraction) -> ScaledInstance:
    """Scale against a bare magnitude cap instead of named guesses.

    Admits every value up to 2 * m_max, the largest any guess with this
    m_max could admit. The admitted set is a superset of each such guess,
    so running one relaxed pass per distinct m_max covers them all while
    the coordinate bound ceil(2n / eps') is unchanged.
    """
    k = eps_prime * m_max / inst.n
    num, den = k.numerator, k.denominator
    lim = 2 * m_max
    u1s, u2s, pdn, pup = [], [], [], []
    for r in inst.resources:
        u1s.append(-((-r.u1 * den) // num) if r.u1 <= lim else math.inf)
        u2s.append(r.u2 * den // num if r.u2 <= lim else -math.inf)
        if r.p <= lim:
            pdn.append(r.p * den // num)
            pup.append(-((-r.p * den) // num))
        else:
            pdn.append(-math.inf)
            pup.append(math.inf)
    return ScaledInstance(
        u1_scaled=tuple(u1s),
        u2_scaled=tuple(u2s),
        p_scaled_down=tuple(pdn),
        p_scaled_up=tuple(pup),
        k_param=k,
        eps_prime=eps_prime,
        m_max=m_max,
        guess=(None, None, None),
        resources=inst.resources,
    )


def _flip_pass_py(scaled: ScaledInstance, a1: frozenset, direction: str,
                  budget, full_table: bool = False):
    """Reference boundary-flag DP over python dicts.

    State keys are (su1, su2, sp, flag); the count of sold resources is
    deliberately absent because selection reads only the sums, so merging
    states that differ in it alone keeps every optimum reachable while
    shrinking the table. The scaled key only collapses near-identical
    partitions; every surviving terminal state is then scored with its
    exact unscaled welfares and the exact minimizers (with ties) are
    returned as (s0, s1) name sets. With full_table set, the terminal
    key -> cheapest cost map is returned instead.
    """
    resources = scaled.resources
    order = dp_order(resources)
    to_two = direction == ONE_TO_TWO
    states = {(0, 0, 0, 0): (0, frozenset(), frozenset())}
    for ix in order:
        r = resources[ix]
        in1 = r.name in a1
        su1_r = scaled.u1_scaled[ix]
        su2_r = scaled.u2_scaled[ix]
        sp_r = scaled.p_scaled_down[ix]
        ok1 = su1_r != math.inf
        ok2 = su2_r != -math.inf
        okp = sp_r != -math.inf and r.c != math.inf
        spawned = dict(states)
        for (su1, su2, sp, f), val in states.items():
            if f == 0:
                k2 = (su1, su2, sp, 1)
                old = spawned.get(k2)
                if old is None or val[0] < old[0]:
                    spawned[k2] = val
        nxt = {}

        def offer(key, val):
            old = nxt.get(key)
            if old is None or val[0] < old[0]:
                nxt[key] = val

        for (su1, su2, sp, f), (cost, s0, s1) in spawned.items():
            if to_two:
                keep1 = in1 and f == 0 and ok1
                keep2 = (not in1 or f == 1) and ok2
            else:
                keep1 = (in1 or f == 0) and ok1
                keep2 = not in1 and f == 1 and ok2
            if keep1:
                offer((su1 + su1_r, su2, sp, f), (cost, s0, s1 | {r.name}))
            if keep2:
                offer((su1, su2 + su2_r, sp, f), (cost, s0, s1))
            if okp:
                c2 = cost + r.c
                if cost_fits(c2, budget):
                    offer((su1, su2, sp + sp_r, f), (c2, s0 | {r.name}, s1))
        states = nxt
    if full_table:
        table = {}
        for (su1, su2, sp, f), (cost, _, _) in states.items():
            key = (su1, su2, sp)
            if key not in table or cost < table[key]:
                table[key] = cost
        return table
    by = {r.name: r for r in resources}
    names = frozenset(by)
    best = _Best(_rho_less)
    for (su1, su2, sp, f), (cost, s0, s1) in states.items():
        tu1 = sum(by[x].u1 for x in s1)
        tp = sum(by[x].p for x in s0)
        tu2 = sum(by[x].u2 for x in names - s0 - s1)
        w1x2, w2x2 = _doubled_welfares(tu1, tu2, tp)
        if w1x2 > 0 and w2x2 > 0:
            best.offer((max(w1x2, w2x2), min(w1x2, w2x2)), (s0, s1))
    return best.key, best.items


def _flip_pass_np(scaled: ScaledInstance, a1: frozenset, direction: str,
                  budget, full_table: bool = False):
    """Vectorized boundary-flag DP with packed int64 state keys."""
    resources = scaled.resources
    n = len(resources)
    order = dp_order(resources)
    ep = scaled.eps_prime
    km = -((-2 * n * ep.denominator) // ep.numerator) + 1
    bs = (n * km).bit_length()
    if 1 + 3 * bs > _PACK_BITS or n > _PACK_BITS:
        return None  # caller falls back to the dict engine
    sh_sp, sh_su2, sh_su1 = 1, 1 + bs, 1 + 2 * bs
    to_two = direction == ONE_TO_TWO
    finite_budget = budget != math.inf

    keys = np.zeros(1, np.int64)
    cost = np.zeros(1, np.int64)
    m0 = np.zeros(1, np.int64)
    m1 = np.zeros(1, np.int64)
    for pos, ix in enumerate(order):
        r = resources[ix]
        in1 = r.name in a1
        su1_r = scaled.u1_scaled[ix]
        su2_r = scaled.u2_scaled[ix]
        sp_r = scaled.p_scaled_down[ix]
        ok1 = su1_r != math.inf
        ok2 = su2_r != -math.inf
        okp = sp_r != -math.inf and r.c != math.inf
        flip0 = (keys & 1) == 0
        if flip0.any():
            keys = np.concatenate([keys, keys[flip0] | 1])
            cost = np.concatenate([cost, cost[flip0]])
            m0 = np.concatenate([m0, m0[flip0]])
            m1 = np.concatenate([m1, m1[flip0]])
        bit = np.int64(1 << pos)
        parts = []
        flag = keys & 1
        if ok1:
            if to_two:
                sel = (flag == 0) if in1 else np.zeros(len(keys), bool)
            else:
                sel = np.ones(len(keys), bool) if in1 else (flag == 0)
            if sel.any():
                parts.append((
                    keys[sel] + np.int64(int(su1_r) << sh_su1),
                    cost[sel], m0[sel], m1[sel] | bit,
                ))
        if ok2:
            if to_two:
                sel = np.ones(len(keys), bool) if not in1 else (flag == 1)
            else:
                sel = (flag == 1) if not in1 else np.zeros(len(keys), bool)
            if sel.any():
                parts.append((
                    keys[sel] + np.int64(int(su2_r) << sh_su2),
                    cost[sel], m0[sel], m1[sel],
                ))
        if okp:
            c2 = cost + np.int64(r.c)
            sel = (c2 <= budget) if finite_budget else np.ones(len(keys), bool)
            if sel.any():
                parts.append((
                    keys[sel] + np.int64(int(sp_r) << sh_sp),
                    c2[sel], m0[sel] | bit, m1[sel],
                ))
        if not parts:
            return {} if full_table else (None, [])
        keys = np.concatenate([p[0] for p in parts])
        cost = np.concatenate([p[1] for p in parts])
        m0 = np.concatenate([p[2] for p in parts])
        m1 = np.concatenate([p[3] for p in parts])
        srt = np.lexsort((cost, keys))
        keys, cost, m0, m1 = keys[srt], cost[srt], m0[srt], m1[srt]
        first = np.empty(len(keys), bool)
        first[0] = True
        np.not_equal(keys[1:], keys[:-1], out=first[1:])
        keys, cost, m0, m1 = keys[first], cost[first], m0[first], m1[first]

    if full_table:
        coord = np.int64((1 << bs) - 1)
        sp = (keys >> sh_sp) & coord
        su2 = (keys >> sh_su2) & coord
        su1 = (keys >> sh_su1) & coord
        table = {}
        for i in range(len(keys)):
            key = (int(su1[i]), int(su2[i]), int(sp[i]))
            c = int(cost[i])
            if key not in table or c < table[key]:
                table[key] = c
        return table
    # exact unscaled welfares from the carried partition masks
    tu1 = np.zeros(len(keys), np.int64)
    tu2 = np.zeros(len(keys), np.int64)
    tp = np.zeros(len(keys), np.int64)
    for j, ix in enumerate(order):
        r = resources[ix]
        b0 = (m0 >> np.int64(j)) & 1
        b1 = (m1 >> np.int64(j)) & 1
        tu1 += np.int64(r.u1) * b1
        tp += np.int64(r.p) * b0
        tu2 += np.int64(r.u2) * (1 - b0 - b1)
    qn = np.clip(tp - tu1 + tu2, 0, 2 * tp)
    a1w = 2 * tu1 + qn
    a2w = 2 * tu2 + 2 * tp - qn
    mx = np.maximum(a1w, a2w)
    mn = np.minimum(a1w, a2w)
    feas = mn > 0
    if not feas.any():
        return None, []
    ratio = np.where(feas, mx.astype(np.float64) / np.maximum(mn, 1), np.inf)
    near = feas & (ratio <= ratio.min() * (1 + 1e-12))
    names = [resources[ix].name for ix in order]
    best = _Best(_rho_less)
    for i in np.flatnonzero(near):
        km0, km1 = int(m0[i]), int(m1[i])
        s0 = frozenset(names[j] for j in range(n) if km0 >> j & 1)
        s1 = frozenset(names[j] for j in range(n) if km1 >> j & 1)
        best.offer((int(mx[i]), int(mn[i])), (s0, s1))
    return best.key, best.items


def _flip_pass(scaled, a1, direction, budget, full_table=False):
    res = _flip_pass_np(scaled, a1, direction, budget, full_table)
    if res is None:
        res = _flip_pass_py(scaled, a1, direction, budget, full_table)
    return res


def _has_balanced(inst: Instance, triples) -> bool:
    """True when some collected candidate already reaches rho = 1."""
    by = _by_name(inst)
    for s0, s1, s2 in triples:
        cost = 0
        for x in s0:
            cost = cost + by[x].c
        if not cost_fits(cost, inst.budget):
            continue
        u1 = sum(by[x].u1 for x in s1)
        u2 = sum(by[x].u2 for x in s2)
        p = sum(by[x].p for x in s0)
        w1x2, w2x2 = _doubled_welfares(u1, u2, p)
        if w1x2 == w2x2 and w1x2 > 0:
            return True
    return False


def _m_max_values(inst: Instance) -> list[int]:
    # Largest scale first: it admits every value, so when a perfectly
    # balanced plan exists at all it usually surfaces in the first pass
    # and the sweep stops right there.
    vals = set()
    for r in inst.resources:
        for v in (r.u1, r.u2, r.p):
            if v > 0:
                vals.add(-(-v // 2))
    return sorted(vals, reverse=True)


def _tie_assignments(inst: Instance) -> list[frozenset]:
    strict = frozenset(r.name for r in inst.resources if r.u1 > r.u2)
    withties = frozenset(r.name for r in inst.resources if r.u1 >= r.u2)
    return [strict] if strict == withties else [strict, withties]


def _main_branch(inst: Instance, eps: Fraction, triples: set) -> None:
    eps_prime = eps / (eps + 2)
    m_values = _m_max_values(inst)
    all_names = frozenset(r.name for r in inst.resources)
    by = _by_name(inst)
    aw_seen: set = set()

    def balanced(t) -> bool:
        s0, s1, s2 = t
        cost = 0
        for x in s0:
            cost = cost + by[x].c
        if not cost_fits(cost, inst.budget):
            return False
        w1x2, w2x2 = _doubled_welfares(
            sum(by[x].u1 for x in s1),
            sum(by[x].u2 for x in s2),
            sum(by[x].p for x in s0),
        )
        return w1x2 == w2x2 and w1x2 > 0

    def add(s0: frozenset, s1: frozenset, swap: bool) -> bool:
        s2 = all_names - s0 - s1
        t = (s0, s2, s1) if swap else (s0, s1, s2)
        triples.add(t)
        hit = balanced(t)
        if s0 not in aw_seen:
            aw_seen.add(s0)
            t2 = _aw_triple(inst, s0)
            triples.add(t2)
            hit = hit or balanced(t2)
        return hit

    for swap in (False, True):
        inst_o = _mirror(inst) if swap else inst
        assignments = _tie_assignments(inst_o)
        for m in m_values:
            scaled = relaxed_scale(inst_o, m, eps_prime)
            for a1 in assignments:
                for direction in (ONE_TO_TWO, TWO_TO_ONE):
                    _, items = _flip_pass(
                        scaled, a1, direction, inst_o.budget
                    )
                    hit = False
                    for s0, s1 in items:
                        hit = add(s0, s1, swap) or hit
                    if hit:
                        return  # perfectly balanced, nothing beats rho = 1


def _reserved_name(taken, base: str) -> str:
    name = "__sold_" + base
    while name in taken:
        name = "_" + name
    return name


def _heavy_candidates(inst: Instance, heavy: Resource, eps: Fraction,
                      swap: bool, triples: set, pinned: list) -> None:
    """Case analysis for a welfare-dominating resource.

    Either Agent 1 keeps it and the rest is split by the sell-or-allocate
    knapsack, or it is sold outright and the reduced instance is solved
    recursively with a placeholder keeping its price in play.
    """
    names = frozenset(r.name for r in inst.resources)
    rest = names - {heavy.name}
    for strict in (False, True):
        sold, _ = o2_split(inst, rest, inst.budget, eps, strict_prices=strict)
        s1 = frozenset({heavy.name})
        s2 = rest - sold
        triples.add((sold, s2, s1) if swap else (sold, s1, s2))
        q = Fraction(0, 1) if swap else Fraction(1, 1)
        args = (sold, s2, s1, q) if swap else (sold, s1, s2, q)
        pinned.append(pinned_plan(*args, inst=_unswap(inst, swap)))

    if not cost_fits(heavy.c, inst.budget):
        return
    placeholder = _reserved_name(names, heavy.name)
    rebuilt = tuple(
        Resource(placeholder, u1=0, u2=0, p=r.p, c=0)
        if r.name == heavy.name
        else r
        for r in inst.resources
    )
    reduced = Instance(resources=rebuilt, budget=inst.budget - heavy.c)
    try:
        sub = fptas_awns_rho(reduced, eps)
    except Infeasible:
        return
    for plan in sub.plans:
        s0 = frozenset(
            heavy.name if x == placeholder else x for x in plan.s0
        ) | {heavy.name}
        s1 = frozenset(x for x in plan.s1 if x != placeholder)
        s2 = frozenset(x for x in plan.s2 if x != placeholder)
        triples.add((s0, s2, s1) if swap else (s0, s1, s2))


def _unswap(inst: Instance, swap: bool) -> Instance:
    return _mirror(inst) if swap else inst


def _assemble(inst: Instance, triples, pinned: list[Plan], eps: Fraction) -> SolveResult:
    by = _by_name(inst)
    best = _Best(_rho_less)
    ordered = sorted(
        triples,
        key=lambda t: (tuple(sorted(t[0])), tuple(sorted(t[1])), tuple(sorted(t[2]))),
    )
    for s0, s1, s2 in ordered:
        cost = 0
        for x in s0:
            cost = cost + by[x].c
        if not cost_fits(cost, inst.budget):
            continue
        u1 = sum(by[x].u1 for x in s1)
        u2 = sum(by[x].u2 for x in s2)
        p = sum(by[x].p for x in s0)
        w1x2, w2x2 = _doubled_welfares(u1, u2, p)
        if w1x2 <= 0 or w2x2 <= 0:
            continue
        best.offer((max(w1x2, w2x2), min(w1x2, w2x2)), ("derived", s0, s1, s2))
    for plan in pinned:
        rep = welfare(plan, inst)
        if not rep.feasible:
            continue
        best.offer((rep.rho.numerator, rep.rho.denominator), ("pinned", plan))
    if best.key is None:
        raise Infeasible("no feasible plan found")
    value = Fraction(best.key[0], best.key[1])
    plans = []
    seen = set()
    for item in best.items:
        if item[0] == "derived":
            plan = derived_plan(item[1], item[2], item[3], inst)
        else:
            plan = item[1]
        marker = (plan.s0, plan.s1, plan.s2, plan.q, plan.q_pinned)
        if marker not in seen:
            seen.add(marker)
            plans.append(plan)
    plans = pareto_filter(plans, inst)
    plans.sort(key=plan_sort_key)
    first_cost = 0
    for x in plans[0].s0:
        first_cost = first_cost + by[x].c
    return SolveResult(
        plans=plans,
        objective=value,
        cost=first_cost,
        solver="fptas",
        epsilon=eps,
    )


def _try_exact(inst: Instance, cap: int, eps: Fraction) -> Optional[SolveResult]:
    sets = _sale_sets_upto(inst, cap)
    if sets is None:
        return None
    triples = {_aw_triple(inst, s0) for s0 in sets}
    return _assemble(inst, triples, [], eps)


def fptas_awns_rho(inst: Instance, eps, *, exact_cap: int = EXACT_PATH_CAP) -> SolveResult:
    """Plan set approaching the minimum welfare ratio within (1 + eps).

    The reported objective is the exact ratio of the returned plans on the
    unscaled instance; it is at most (1 + eps) times the best ratio any
    affordable sale set can reach. Raises Infeasible when no affordable
    plan gives both agents positive welfare.
    """
    eps = to_eps(eps)
    result = _try_exact(inst, exact_cap, eps)
    if result is not None:
        return result

    triples: set = set()
    pinned: list[Plan] = []
    triples.add(_aw_triple(inst, frozenset()))
    for r in inst.resources:
        if r.c != math.inf and cost_fits(r.c, inst.budget):
            triples.add(_aw_triple(inst, frozenset({r.name})))

    heavy_found = False
    for swap in (False, True):
        inst_o = _mirror(inst) if swap else inst
        heavy = detect_heavy_resource(inst_o, eps)
        if heavy is not None:
            heavy_found = True
            _heavy_candidates(inst_o, heavy, eps, swap, triples, pinned)
    if not heavy_found and not _has_balanced(inst, triples):
        _main_branch(inst, eps, triples)
    return _assemble(inst, triples, pinned, eps)
