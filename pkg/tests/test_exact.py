import math
import random
from fractions import Fraction
from itertools import combinations

import pytest

from dsirs.adjusted_winner import aw_derived_plan
from dsirs.errors import Infeasible, InstanceTooLarge, ValidationError
from dsirs.exact import (
    EnvyFreeReport,
    Objective,
    SolveResult,
    oracle_best_plan,
    solve_awns_exact,
)
from dsirs.model import Instance, Resource, derived_plan, total_u1, welfare
from helpers import exact_metrics, random_instance, sale_fits


def awns_min_d_duplicate(inst):
    """Independent enumeration of all affordable sale sets by bitmask."""
    names = list(inst.names())
    best = None
    for mask in range(1 << len(names)):
        s0 = frozenset(names[i] for i in range(len(names)) if mask >> i & 1)
        if not sale_fits(inst, s0):
            continue
        plan = aw_derived_plan(s0, inst)
        _, w1, w2, d, rho = exact_metrics(inst, plan.s0, plan.s1, plan.s2)
        if w1 <= 0 or w2 <= 0:
            continue
        if best is None or d < best:
            best = d
    return best


def test_min_rho_worked_example(alex_belle):
    result = solve_awns_exact(alex_belle, Objective("min-rho"))
    assert result.objective == 1
    assert result.solver == "exact-awns"
    assert result.cost == 1
    assert len(result.plans) == 1
    plan = result.plans[0]
    assert plan.s0 == {"r1"}
    assert plan.s1 == {"r2", "r3", "r4", "r5"}
    assert plan.s2 == {"r6"}
    assert plan.q == Fraction(4, 25)
    rep = welfare(plan, alex_belle)
    assert rep.w1 == rep.w2 == 52


def test_vacuous_cost_threshold_picks_empty_sale(alex_belle):
    objective = Objective("min-cost-given-d", Fraction(total_u1(alex_belle)))
    result = solve_awns_exact(alex_belle, objective)
    assert result.objective == 0
    assert result.cost == 0
    assert result.plans[0].s0 == frozenset()


def test_min_d_matches_duplicate_enumerator():
    rng = random.Random(13)
    checked = 0
    for _ in range(50):
        inst = random_instance(rng, 10)
        try:
            result = solve_awns_exact(inst, Objective("min-d"))
        except Infeasible:
            assert awns_min_d_duplicate(inst) is None
            continue
        assert result.objective == awns_min_d_duplicate(inst)
        checked += 1
    assert checked >= 30


def test_infeasible_when_every_plan_has_zero_welfare():
    inst = Instance((Resource("a", 0, 0, 0, 0), Resource("b", 0, 0, 0, 0)), 0)
    with pytest.raises(Infeasible):
        solve_awns_exact(inst, Objective("min-d"))


def test_infeasible_constrained_threshold(d_vs_rho):
    # only the empty sale is affordable at budget 0 and its rho is 99/92
    tight = Instance(d_vs_rho.resources, budget=0)
    with pytest.raises(Infeasible):
        solve_awns_exact(tight, Objective("min-cost-given-rho", Fraction(1)))


def test_instance_cap():
    rows = tuple(Resource(f"r{i}", 1, 1, 0, 0) for i in range(21))
    with pytest.raises(InstanceTooLarge):
        solve_awns_exact(Instance(rows, 0), Objective("min-d"))
    with pytest.raises(InstanceTooLarge):
        oracle_best_plan(Instance(rows[:16], 0), "min-d")


def test_objective_validation():
    with pytest.raises(ValidationError):
        Objective("min-welfare")
    with pytest.raises(ValidationError):
        Objective("min-cost-given-d")
    with pytest.raises(ValidationError):
        Objective("min-d", Fraction(1))
    with pytest.raises(ValidationError):
        Objective("min-cost-given-rho", Fraction(1, 2))
    assert Objective("min-cost-given-d", Fraction(0)).threshold == 0


def test_min_d_zero_iff_min_rho_one():
    rng = random.Random(37)
    for _ in range(40):
        inst = random_instance(rng, rng.randint(1, 8))
        try:
            d_opt = solve_awns_exact(inst, Objective("min-d")).objective
        except Infeasible:
            with pytest.raises(Infeasible):
                solve_awns_exact(inst, Objective("min-rho"))
            continue
        rho_opt = solve_awns_exact(inst, Objective("min-rho")).objective
        assert (d_opt == 0) == (rho_opt == 1)


def test_oracle_never_worse_than_sale_set_solver():
    rng = random.Random(43)
    for _ in range(30):
        inst = random_instance(rng, rng.randint(1, 6))
        try:
            exact_d = solve_awns_exact(inst, Objective("min-d")).objective
        except Infeasible:
            continue
        oracle_d = oracle_best_plan(inst, "min-d").objective
        assert oracle_d <= exact_d


def test_constrained_variant_consistent_with_min_d():
    rng = random.Random(47)
    for _ in range(30):
        inst = random_instance(rng, rng.randint(1, 7))
        try:
            d_opt = solve_awns_exact(inst, Objective("min-d")).objective
        except Infeasible:
            continue
        result = solve_awns_exact(inst, Objective("min-cost-given-d", d_opt))
        rep = welfare(result.plans[0], inst)
        assert rep.d <= d_opt


def test_max_nash_result_is_not_dominated():
    rng = random.Random(53)
    for _ in range(20):
        inst = random_instance(rng, 6)
        try:
            result = solve_awns_exact(inst, Objective("max-nash"))
        except Infeasible:
            continue
        reports = [welfare(p, inst) for p in result.plans]
        names = list(inst.names())
        for k in range(len(names) + 1):
            for combo in combinations(names, k):
                s0 = frozenset(combo)
                if not sale_fits(inst, s0):
                    continue
                other = welfare(aw_derived_plan(s0, inst), inst)
                for rep in reports:
                    assert not (
                        other.w1 >= rep.w1
                        and other.w2 >= rep.w2
                        and (other.w1 > rep.w1 or other.w2 > rep.w2)
                    )


def test_oracle_d_vs_rho_disagreement(d_vs_rho):
    min_d = oracle_best_plan(d_vs_rho, "min-d")
    assert min_d.objective == 1
    assert min_d.plans == [
        derived_plan({"a"}, {"b"}, {"c"}, d_vs_rho)
    ]
    assert welfare(min_d.plans[0], d_vs_rho).rho == 2

    min_rho = oracle_best_plan(d_vs_rho, "min-rho")
    assert min_rho.objective == Fraction(99, 92)
    assert min_rho.plans == [
        derived_plan(set(), {"a"}, {"b", "c"}, d_vs_rho)
    ]
    assert welfare(min_rho.plans[0], d_vs_rho).d == 7


def test_oracle_envy_free_nonexistence(envy_impossibility):
    report = oracle_best_plan(envy_impossibility, "exists-envy-free")
    assert isinstance(report, EnvyFreeReport)
    assert not report.exists
    assert report.plans == []
    pinned = oracle_best_plan(
        envy_impossibility, "exists-envy-free", pinned_q_search=True
    )
    assert not pinned.exists


def test_oracle_envy_free_existence(conflicts):
    report = oracle_best_plan(conflicts, "exists-envy-free")
    assert report.exists
    witness = derived_plan({"z"}, {"w", "y"}, {"v", "x"}, conflicts)
    assert witness.q == 1
    assert witness in report.plans
    pinned = oracle_best_plan(conflicts, "exists-envy-free", pinned_q_search=True)
    assert pinned.exists


def test_oracle_conflicts_min_d_is_zero(conflicts):
    result = oracle_best_plan(conflicts, "min-d")
    assert result.objective == 0
    # the equal-welfare plan highlighted alongside the fixture
    named = derived_plan({"y"}, {"x", "z"}, {"v", "w"}, conflicts)
    rep = welfare(named, conflicts)
    assert rep.w1 == rep.w2 == 46
    for plan in result.plans:
        assert welfare(plan, conflicts).d == 0


def test_pinned_search_matches_grid_scan():
    # oracle-of-the-oracle: exhaustive q grid plus interval endpoints
    rng = random.Random(61)
    for _ in range(12):
        inst = random_instance(rng, 4, unsellable_rate=0.0)
        report = oracle_best_plan(inst, "exists-envy-free", pinned_q_search=True)
        found = False
        names = list(inst.names())
        from helpers import all_tripartitions

        for s0, s1, s2 in all_tripartitions(names):
            if not sale_fits(inst, s0):
                continue
            by = {r.name: r for r in inst.resources}
            P = sum(by[x].p for x in s0)
            grid = {Fraction(k, 40) for k in range(41)}
            if P:
                d1 = sum(by[x].u1 for x in s1) - sum(by[x].u1 for x in s2)
                d2 = sum(by[x].u2 for x in s2) - sum(by[x].u2 for x in s1)
                for bound in (Fraction(P - d1, 2 * P), Fraction(P + d2, 2 * P)):
                    if 0 <= bound <= 1:
                        grid.add(bound)
            for q in grid:
                _, w1, w2, _, _ = exact_metrics(inst, s0, s1, s2, q)
                if w1 <= 0 or w2 <= 0:
                    continue
                mirror_w1 = sum(by[x].u1 for x in s2) + (1 - q) * P
                mirror_w2 = sum(by[x].u2 for x in s1) + q * P
                if mirror_w1 - w1 <= 0 and mirror_w2 - w2 <= 0:
                    found = True
        assert report.exists == found


def test_results_are_deterministic(conflicts):
    a = solve_awns_exact(conflicts, Objective("min-rho"))
    b = solve_awns_exact(conflicts, Objective("min-rho"))
    assert a == b
    c = oracle_best_plan(conflicts, "min-d")
    d = oracle_best_plan(conflicts, "min-d")
    assert c == d
