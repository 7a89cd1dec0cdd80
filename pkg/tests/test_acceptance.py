"""Acceptance suite: one test per stated criterion, each with its runtime
budget asserted and a summary line printed on success."""

import csv
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from dsirs.adjusted_winner import classic_aw
from dsirs.errors import BadGuess, Infeasible
from dsirs.exact import Objective, oracle_best_plan, solve_awns_exact
from dsirs.fptas import fptas_awns_rho
from dsirs.knapsack import knapsack_fptas
from dsirs.model import audit_counters, derived_plan, pinned_plan, welfare
from dsirs.scaling import scale_instance
from dsirs.simulation import (
    SweepConfig,
    aggregate,
    run_sweep,
    synthesize_matrices,
    write_aggregates_csv,
    write_results_csv,
)
from helpers import random_instance


@pytest.fixture(scope="module")
def synthetic_sweep(tmp_path_factory):
    """The 200-instance seed-42 sweep, run once and shared."""
    t0 = time.perf_counter()
    records = run_sweep(SweepConfig(matrices=synthesize_matrices(200, 42)))
    elapsed = time.perf_counter() - t0
    out = tmp_path_factory.mktemp("sweep")
    write_results_csv(records, out / "results.csv")
    write_aggregates_csv(aggregate(records), out / "aggregates.csv")
    return records, out, elapsed


def test_worked_example_reproduction(alex_belle):
    t0 = time.perf_counter()

    outcome = classic_aw(alex_belle)
    assert set(outcome.transfers) == {"r2", "r3", "r4", "r5"}
    assert outcome.s1 == frozenset({"r1"})
    assert sum(r.u1 for r in alex_belle.resources if r.name in outcome.s1) == 56
    assert sum(r.u2 for r in alex_belle.resources if r.name in outcome.s2) == 50
    assert outcome.split is not None and outcome.split[0] == "r1"
    assert outcome.w1 == outcome.w2

    for res in (
        solve_awns_exact(alex_belle, Objective("min-rho")),
        fptas_awns_rho(alex_belle, 0.1),
    ):
        assert res.objective == Fraction(1)
        plan = res.plans[0]
        assert plan.s0 == frozenset({"r1"})
        assert plan.q == Fraction(4, 25)  # 0.16
        report = welfare(plan, alex_belle)
        assert report.w1 == 52 and report.w2 == 52

    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"PASS worked example: rho=1, S0={{r1}}, q=4/25, W=52/52 in {elapsed:.2f}s")


def test_proposition_fixtures_exact(d_vs_rho, envy_impossibility, conflicts):
    t0 = time.perf_counter()

    res_d = oracle_best_plan(d_vs_rho, "min-d")
    assert res_d.objective == Fraction(1)
    assert welfare(res_d.plans[0], d_vs_rho).rho == Fraction(2)
    res_r = oracle_best_plan(d_vs_rho, "min-rho")
    assert res_r.objective == Fraction(99, 92)
    assert welfare(res_r.plans[0], d_vs_rho).d == Fraction(7)

    assert oracle_best_plan(envy_impossibility, "exists-envy-free").exists is False

    rep1 = welfare(derived_plan({"y"}, {"x", "z"}, {"v", "w"}, conflicts), conflicts)
    assert (rep1.w1, rep1.w2) == (46, 46)
    assert (rep1.envy1, rep1.envy2) == (37, 11)
    rep2 = welfare(
        pinned_plan({"z"}, {"w", "y"}, {"v", "x"}, Fraction(1), conflicts), conflicts)
    assert (rep2.w1, rep2.w2) == (62, 67)
    assert (rep2.envy1, rep2.envy2) == (-24, -33)

    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"PASS proposition fixtures: min-d=1(rho=2), min-rho=99/92(d=7), "
          f"no envy-free plan, conflict plans exact in {elapsed:.2f}s")


def test_derived_share_attains_grid_minimum():
    # the derived q must reach the minimum of both metrics over 10^4 + 2
    # candidate shares: the uniform grid k/10^4 plus the derived q itself
    t0 = time.perf_counter()
    D = 10_000
    k = np.arange(D + 1, dtype=np.int64)
    rng = random.Random(424242)
    draws = ratio_checked = 0
    for _ in range(1000):
        inst = random_instance(rng, rng.randint(2, 10))
        U1 = U2 = P = 0
        for r in inst.resources:
            slot = rng.randrange(3)
            if slot == 0:
                P += r.p
            elif slot == 1:
                U1 += r.u1
            else:
                U2 += r.u2
        qn = min(max(P - U1 + U2, 0), 2 * P)
        w1x2, w2x2 = 2 * U1 + qn, 2 * U2 + 2 * P - qn

        n1 = U1 * D + k * P
        n2 = U2 * D + (D - k) * P
        # difference: derived d <= every grid d, compared as exact integers
        assert abs(w1x2 - w2x2) * D <= 2 * int(np.abs(n1 - n2).min())
        # ratio: cross-multiplied comparison wherever the grid point is valid
        mx, mn = np.maximum(n1, n2), np.minimum(n1, n2)
        mask = mn > 0
        if min(w1x2, w2x2) > 0 and mask.any():
            assert np.all(
                max(w1x2, w2x2) * mn[mask] <= mx[mask] * min(w1x2, w2x2))
            ratio_checked += 1
        draws += 1

    elapsed = time.perf_counter() - t0
    assert draws >= 1000
    assert elapsed < 30.0
    print(f"PASS derived-share grid minimum: {draws} draws "
          f"({ratio_checked} with valid ratios), {D + 2} candidates each, "
          f"in {elapsed:.1f}s")


def test_approximation_guarantee_against_exact_solver():
    t0 = time.perf_counter()
    rng = random.Random(2026)
    cases = []
    while len(cases) < 200:
        inst = random_instance(rng, rng.randint(2, 12))
        try:
            exact = solve_awns_exact(inst, Objective("min-rho"))
        except Infeasible:
            continue
        cases.append((inst, exact.objective))

    compared = 0
    for eps in (0.5, 0.25, 0.1):
        bound = 1 + Fraction(str(eps))
        for inst, exact_rho in cases:
            # default path, then with the exact shortcut disabled so the
            # scaled dynamic program itself is exercised
            assert fptas_awns_rho(inst, eps).objective <= exact_rho * bound
            assert fptas_awns_rho(inst, eps, exact_cap=0).objective \
                <= exact_rho * bound
            compared += 2

    elapsed = time.perf_counter() - t0
    assert len(cases) >= 200 and compared >= 1200
    assert elapsed < 600.0
    print(f"PASS approximation guarantee: {compared} runs over {len(cases)} "
          f"instances, eps in {{0.5, 0.25, 0.1}}, zero violations, "
          f"in {elapsed:.1f}s")


def test_knapsack_fptas_guarantee():
    t0 = time.perf_counter()
    rng = random.Random(77)
    n = 12
    bits = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.float64)
    checked = 0
    for _ in range(500):
        values = [rng.randint(0, 50) for _ in range(n)]
        weights = [math.inf if rng.random() < 0.1 else rng.randint(0, 20)
                   for _ in range(n)]
        capacity = rng.randint(0, 60)
        # unsellable weights become just-over-capacity so 0*inf never occurs
        brute_w = np.array([min(w, capacity + 1) for w in weights])
        opt = int((bits @ np.array(values, dtype=np.float64))[
            (bits @ brute_w) <= capacity].max())
        for eps in (0.5, 0.1):
            chosen = knapsack_fptas(list(zip(values, weights)), capacity, eps)
            weight = sum(weights[i] for i in chosen)
            value = sum(values[i] for i in chosen)
            assert weight <= capacity
            assert value >= (1 - Fraction(str(eps))) * opt
            checked += 1

    elapsed = time.perf_counter() - t0
    assert checked == 1000
    assert elapsed < 60.0
    print(f"PASS knapsack guarantee: 500 12-item instances, eps in "
          f"{{0.5, 0.1}}, zero violations, in {elapsed:.1f}s")


def test_scaling_rule_bounds():
    t0 = time.perf_counter()
    rng = random.Random(555)
    pairs = 0
    while pairs < 100:
        inst = random_instance(rng, rng.randint(2, 10))
        guess = tuple(
            None if rng.random() < 0.25 else rng.randrange(inst.n)
            for _ in range(3)
        )
        eps = rng.choice((0.5, 0.25, 0.1))
        try:
            sc = scale_instance(inst, guess, eps)
        except BadGuess:
            continue
        K = sc.k_param
        sums = {"u1": [Fraction(0), Fraction(0)], "u2": [Fraction(0), Fraction(0)],
                "pdn": [Fraction(0), Fraction(0)], "pup": [Fraction(0), Fraction(0)]}
        for r, u1h, u2h, pdn, pup in zip(
            inst.resources, sc.u1_scaled, sc.u2_scaled,
            sc.p_scaled_down, sc.p_scaled_up,
        ):
            if u1h != math.inf:
                assert r.u1 <= K * u1h < r.u1 + K
                sums["u1"][0] += K * u1h
                sums["u1"][1] += r.u1
            if u2h != -math.inf:
                assert r.u2 - K < K * u2h <= r.u2
                sums["u2"][0] += K * u2h
                sums["u2"][1] += r.u2
            if pup != math.inf:
                assert r.p - K < K * pdn <= r.p <= K * pup < r.p + K
                sums["pdn"][0] += K * pdn
                sums["pdn"][1] += r.p
                sums["pup"][0] += K * pup
                sums["pup"][1] += r.p
        limit = sc.eps_prime * sc.m_max
        for scaled_total, true_total in sums.values():
            assert abs(scaled_total - true_total) <= limit
        pairs += 1

    elapsed = time.perf_counter() - t0
    assert pairs >= 100
    print(f"PASS scaling bounds: {pairs} instance/guess pairs, per-item gaps "
          f"< K and aggregate error <= eps'*m_max, in {elapsed:.1f}s")


def test_simulation_shape(synthetic_sweep, tmp_path):
    records, out_dir, first_elapsed = synthetic_sweep
    t0 = time.perf_counter()

    # (ii) within every (instance, mode) series the ratio never worsens
    series = {}
    for rec in records:
        series.setdefault((rec.instance_id, rec.mode), []).append(rec)
    assert len(series) == 200 * 6
    for recs in series.values():
        assert [r.budget for r in recs] == [0, 1, 2, 4, 8, 16, 32, 64]
        rhos = [r.rho for r in recs if r.feasible]
        assert all(a >= b for a, b in zip(rhos, rhos[1:]))

    # (i) per mode, the mean ratio at the top budget improves on budget 0
    rows = {(row.mode, row.budget): row for row in aggregate(records)}
    modes = {mode for mode, _ in rows}
    assert len(modes) == 6
    for mode in modes:
        lo, hi = rows[(mode, 0)], rows[(mode, 64)]
        assert hi.mean_rho is not None and lo.mean_rho is not None
        assert hi.mean_rho <= lo.mean_rho

    # (iii) an independent rerun reproduces results.csv byte for byte
    rerun = run_sweep(SweepConfig(matrices=synthesize_matrices(200, 42)))
    write_results_csv(rerun, tmp_path / "results.csv")
    assert (tmp_path / "results.csv").read_bytes() == \
        (out_dir / "results.csv").read_bytes()

    elapsed = first_elapsed + (time.perf_counter() - t0)
    assert elapsed < 900.0
    print(f"PASS simulation shape: 200 instances x 6 modes x 8 budgets, "
          f"monotone ratios, improving means, byte-identical rerun, "
          f"in {elapsed:.1f}s")


def test_plot_crosscheck(synthetic_sweep, tmp_path):
    from dsirs_plots import MeanMismatch, render

    _, out_dir, _ = synthetic_sweep
    written = render(out_dir / "aggregates.csv", tmp_path / "figs")
    assert [p.name for p in written] == [
        "mean_rho_vs_budget.png", "mean_d_vs_budget.png"]
    assert all(p.stat().st_size > 0 for p in written)

    # corrupt one feasible row: the recomputed means must disagree loudly
    corrupted = tmp_path / "corrupted"
    corrupted.mkdir()
    (corrupted / "aggregates.csv").write_bytes(
        (out_dir / "aggregates.csv").read_bytes())
    with open(out_dir / "results.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    for row in rows[1:]:
        if row[12] == "1":
            row[4] = str(int(row[4]) + 1)
            break
    with open(corrupted / "results.csv", "w", newline="") as fh:
        csv.writer(fh).writerows(rows)
    with pytest.raises(MeanMismatch):
        render(corrupted / "aggregates.csv", tmp_path / "figs2")
    print("PASS plot cross-check: figures rendered, recomputed means match, "
          "corrupted row aborts rendering")


def test_difference_zero_iff_ratio_one_audit():
    counts = audit_counters()
    assert counts["evaluations"] > 0
    assert counts["violations"] == 0
    print(f"PASS d=0 <-> rho=1 audit: {counts['evaluations']} evaluations, "
          f"0 violations")
