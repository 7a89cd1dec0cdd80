"""Budget-sweep experiments on Spliddit-style utility matrices.

The pipeline: load (or synthesize) matrices of integer utilities whose rows
sum to 1000, sample one agent pair per matrix, instantiate costs and prices
from a (cost operator, price operator) mode pair, then for each budget in
the grid solve the min-ratio problem and record the best plan found across
the plain run, the agent-swapped run and, when some resource is utterly
dominated in utility, forced-allocation / forced-sale variants. Records and
their per-mode aggregates are written as CSV.

Everything is seeded and counter-derived, so results are byte-identical
across runs and independent of execution order.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import (
    EmptyInput,
    Infeasible,
    MalformedRow,
    RowSumNot1000,
    SameAgentSampled,
)
from .fptas import fptas_awns_rho
from .model import (
    Instance,
    Plan,
    Resource,
    cost_fits,
    derived_plan,
    pinned_plan,
    plan_sort_key,
    welfare,
)

ROW_SUM = 1000
MIN_ITEMS, MAX_ITEMS = 4, 15
OPS = ("avg", "max", "min")

RESULTS_HEADER = [
    "instance_id", "mode_cost", "mode_price", "budget",
    "rho_num", "rho_den", "d_num", "d_den",
    "s0_size", "s1_size", "s2_size", "variant", "feasible",
]
AGGREGATES_HEADER = [
    "mode_cost", "mode_price", "budget",
    "mean_rho", "mean_d", "n_feasible", "n_infeasible",
]


@dataclass(frozen=True)
class UtilityMatrix:
    """One dispute: n_agents rows of m integer utilities, each row summing
    to 1000 token units."""

    instance_id: str
    values: tuple[tuple[int, ...], ...]

    @property
    def n_agents(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.values[0]) if self.values else 0


@dataclass(frozen=True)
class ModePair:
    cost_op: str
    price_op: str

    def __post_init__(self):
        if self.cost_op not in OPS or self.price_op not in OPS:
            raise ValueError(f"unknown mode pair ({self.cost_op}, {self.price_op})")


MODE_PAIRS = (
    ModePair("avg", "avg"),
    ModePair("max", "max"),
    ModePair("avg", "max"),
    ModePair("max", "avg"),
    ModePair("max", "min"),
    ModePair("avg", "min"),
)


@dataclass(frozen=True)
class SweepRecord:
    instance_id: str
    mode: ModePair
    budget: int
    rho: Union[Fraction, float]
    d: Fraction
    s0_size: int
    s1_size: int
    s2_size: int
    variant: str
    feasible: bool


@dataclass(frozen=True)
class AggregateRow:
    mode: ModePair
    budget: int
    mean_rho: Optional[Fraction]
    mean_d: Optional[Fraction]
    n_feasible: int
    n_infeasible: int


@dataclass(frozen=True)
class SweepConfig:
    matrices: Sequence[UtilityMatrix]
    budgets: tuple = (0, 1, 2, 4, 8, 16, 32, 64)
    modes: tuple = MODE_PAIRS
    eps: Fraction = Fraction(1, 10)
    seed: int = 42
    dominance_threshold: int = 10


def _derive(seed: int, label: str, index: int) -> int:
    """Counter-based child seed so parallel order cannot change draws."""
    digest = hashlib.sha256(repr((seed, label, index)).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def load_utility_matrices(path, first_n: int = 5000) -> list[UtilityMatrix]:
    """Parse instance blocks, validate row sums, keep the 4..15 item band.

    Block format: a header line "instance,<id>" followed by one line of m
    comma-separated integers per agent. File order is preserved and only
    the first first_n accepted instances are returned.
    """
    blocks: list[tuple[str, list[list[str]]]] = []
    with open(path, newline="") as fh:
        current = None
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].strip() == "instance":
                if len(row) != 2:
                    raise MalformedRow(f"line {lineno}: bad instance header")
                current = (row[1].strip(), [])
                blocks.append(current)
                continue
            if current is None:
                raise MalformedRow(f"line {lineno}: row before any instance header")
            current[1].append(row)
    out = []
    for instance_id, rows in blocks:
        parsed = []
        for rix, row in enumerate(rows):
            try:
                vals = tuple(int(cell) for cell in row)
            except ValueError:
                raise MalformedRow(
                    f"instance {instance_id}, row {rix}: non-integer cell"
                ) from None
            if any(v < 0 for v in vals):
                raise MalformedRow(f"instance {instance_id}, row {rix}: negative value")
            if parsed and len(vals) != len(parsed[0]):
                raise MalformedRow(f"instance {instance_id}, row {rix}: ragged row")
            if sum(vals) != ROW_SUM:
                raise RowSumNot1000(
                    f"instance {instance_id}, row {rix}: sum {sum(vals)}"
                )
            parsed.append(vals)
        matrix = UtilityMatrix(instance_id, tuple(parsed))
        if matrix.n_agents >= 2 and MIN_ITEMS <= matrix.m <= MAX_ITEMS:
            out.append(matrix)
        if len(out) >= first_n:
            break
    return out


def write_utility_matrices(matrices: Sequence[UtilityMatrix], path) -> None:
    """Inverse of load_utility_matrices: one header line per instance block."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for m in matrices:
            writer.writerow(["instance", m.instance_id])
            for row in m.values:
                writer.writerow(row)


def _composition(rng: random.Random, parts: int, total: int) -> tuple[int, ...]:
    """Random integer composition of `total`: Dirichlet-style weights,
    floored, with the remainder spread over the largest fractional parts."""
    weights = [rng.expovariate(1.0) for _ in range(parts)]
    s = sum(weights)
    raw = [w * total / s for w in weights]
    floors = [int(x) for x in raw]
    remainder = total - sum(floors)
    order = sorted(range(parts), key=lambda i: (floors[i] - raw[i], i))
    for i in order[:remainder]:
        floors[i] += 1
    return tuple(floors)


def synthesize_matrices(count: int, rng_seed: int) -> list[UtilityMatrix]:
    """Format-compatible substitutes for the unavailable real data."""
    out = []
    for idx in range(count):
        child = random.Random(_derive(rng_seed, "matrix", idx))
        m = child.randint(MIN_ITEMS, MAX_ITEMS)
        n_agents = child.randint(2, 6)
        rows = tuple(_composition(child, m, ROW_SUM) for _ in range(n_agents))
        out.append(UtilityMatrix(f"syn-{idx:05d}", rows))
    return out


def _avg_half_up(values) -> int:
    vals = list(values)
    return (2 * sum(vals) + len(vals)) // (2 * len(vals))


def _apply_op(op: str, values) -> int:
    if op == "avg":
        return _avg_half_up(values)
    if op == "max":
        return max(values)
    return min(values)


def raw_prices(matrix: UtilityMatrix, pair, mode: ModePair) -> list[tuple[int, int]]:
    """Per item: (population price before clamping, clamped price)."""
    a, b = pair
    out = []
    for j in range(matrix.m):
        raw = _apply_op(mode.price_op, [row[j] for row in matrix.values])
        cap = max(matrix.values[a][j], matrix.values[b][j])
        out.append((raw, min(raw, cap)))
    return out


def build_dsirs_instance(matrix: UtilityMatrix, pair, mode: ModePair,
                         budget) -> Instance:
    """Instantiate the dispute between the two sampled agents.

    Costs come from the pair's own utilities, prices from the whole
    population, clamped down to max{u1, u2} so the price invariant holds.
    """
    a, b = pair
    if a == b:
        raise SameAgentSampled(f"agent index {a} sampled twice")
    u1_row, u2_row = matrix.values[a], matrix.values[b]
    prices = raw_prices(matrix, pair, mode)
    resources = tuple(
        Resource(
            f"r{j}",
            u1=u1_row[j],
            u2=u2_row[j],
            p=prices[j][1],
            c=_apply_op(mode.cost_op, (u1_row[j], u2_row[j])),
        )
        for j in range(matrix.m)
    )
    return Instance(resources=resources, budget=budget)


def _mirror(inst: Instance) -> Instance:
    swapped = tuple(
        Resource(r.name, u1=r.u2, u2=r.u1, p=r.p, c=r.c) for r in inst.resources
    )
    return Instance(resources=swapped, budget=inst.budget)


def _unmirror_plan(plan: Plan, inst: Instance) -> Plan:
    if plan.q_pinned:
        return pinned_plan(plan.s0, plan.s2, plan.s1, 1 - plan.q, inst)
    return derived_plan(plan.s0, plan.s2, plan.s1, inst)


def _dominated(inst: Instance, threshold: int):
    """Resources one agent values at least `threshold` times the other's.
    Returns (names to force to agent 1, names to force to agent 2)."""
    to1, to2 = set(), set()
    for r in inst.resources:
        if r.u1 > 0 and r.u1 >= threshold * r.u2:
            to1.add(r.name)
        elif r.u2 > 0 and r.u2 >= threshold * r.u1:
            to2.add(r.name)
    return frozenset(to1), frozenset(to2)


def _remap(plan: Plan, s0_extra, s1_extra, s2_extra, drop, inst: Instance) -> Plan:
    s0 = frozenset(x for x in plan.s0 if x not in drop) | s0_extra
    s1 = frozenset(x for x in plan.s1 if x not in drop) | s1_extra
    s2 = frozenset(x for x in plan.s2 if x not in drop) | s2_extra
    if plan.q_pinned:
        return pinned_plan(s0, s1, s2, plan.q, inst)
    return derived_plan(s0, s1, s2, inst)


def _variant_candidates(inst: Instance, eps, threshold: int):
    """Every (rank, label, plan) the sweep considers for one budget cell."""
    out = []

    def solve_into(target, rank, label, mapper):
        try:
            res = fptas_awns_rho(target, eps)
        except Infeasible:
            return
        for plan in res.plans:
            out.append((rank, label, mapper(plan)))

    solve_into(inst, 0, "plain", lambda p: p)
    solve_into(_mirror(inst), 1, "swapped", lambda p: _unmirror_plan(p, inst))

    to1, to2 = _dominated(inst, threshold)
    forced = to1 | to2
    if not forced:
        return out

    keep = tuple(r for r in inst.resources if r.name not in forced)
    if keep:
        reduced = Instance(resources=keep, budget=inst.budget)
        solve_into(reduced, 2, "forced-alloc",
                   lambda p: _remap(p, frozenset(), to1, to2, frozenset(), inst))

    by = {r.name: r for r in inst.resources}
    forced_cost = 0
    for name in forced:
        forced_cost = forced_cost + by[name].c
    if cost_fits(forced_cost, inst.budget):
        rebuilt = tuple(
            Resource("__sold_" + r.name, u1=0, u2=0, p=r.p, c=0)
            if r.name in forced
            else r
            for r in inst.resources
        )
        presold = Instance(resources=rebuilt, budget=inst.budget - forced_cost)
        placeholders = frozenset("__sold_" + name for name in forced)
        solve_into(
            presold, 3, "forced-sale",
            lambda p: _remap(p, forced, frozenset(), frozenset(), placeholders, inst),
        )
    return out


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """One record per (instance, mode, budget), deterministic for a seed.

    Budgets are swept in ascending order and the best plan found so far is
    carried forward, so the reported ratio is non-increasing in budget for
    every (instance, mode) by construction.
    """
    records = []
    budgets = sorted(set(config.budgets))
    for idx, matrix in enumerate(config.matrices):
        child = random.Random(_derive(config.seed, "pair", idx))
        pair = tuple(child.sample(range(matrix.n_agents), 2))
        for mode in config.modes:
            base = build_dsirs_instance(matrix, pair, mode, budget=0)
            prev = None  # (sort key, plan, report) best across budgets so far
            for budget in budgets:
                inst = dataclasses.replace(base, budget=budget)
                best = prev
                for rank, label, plan in _variant_candidates(
                    inst, config.eps, config.dominance_threshold
                ):
                    rep = welfare(plan, inst)
                    if not rep.feasible:
                        continue
                    key = (rep.rho, rep.d, rank, label, plan_sort_key(plan))
                    if best is None or key < best[0]:
                        best = (key, plan, rep)
                if best is None:
                    records.append(SweepRecord(
                        instance_id=matrix.instance_id, mode=mode, budget=budget,
                        rho=math.inf, d=Fraction(0), s0_size=0, s1_size=0,
                        s2_size=0, variant="none", feasible=False,
                    ))
                    continue
                prev = best
                key, plan, rep = best
                records.append(SweepRecord(
                    instance_id=matrix.instance_id, mode=mode, budget=budget,
                    rho=rep.rho, d=rep.d, s0_size=len(plan.s0),
                    s1_size=len(plan.s1), s2_size=len(plan.s2),
                    variant=key[3], feasible=True,
                ))
    return records


def aggregate(records: Sequence[SweepRecord]) -> list[AggregateRow]:
    """Mean rho and d per (mode, budget) over feasible records."""
    if not records:
        raise EmptyInput("no sweep records to aggregate")
    groups: dict = {}
    order = []
    for rec in records:
        key = (rec.mode, rec.budget)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    out = []
    for mode, budget in order:
        rows = groups[(mode, budget)]
        feas = [r for r in rows if r.feasible]
        if feas:
            mean_rho = sum((r.rho for r in feas), Fraction(0)) / len(feas)
            mean_d = sum((r.d for r in feas), Fraction(0)) / len(feas)
        else:
            mean_rho = mean_d = None
        out.append(AggregateRow(
            mode=mode, budget=budget, mean_rho=mean_rho, mean_d=mean_d,
            n_feasible=len(feas), n_infeasible=len(rows) - len(feas),
        ))
    return out


def write_results_csv(records: Sequence[SweepRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in records:
            if r.feasible:
                rho_num, rho_den = r.rho.numerator, r.rho.denominator
            else:
                rho_num, rho_den = "inf", 1
            writer.writerow([
                r.instance_id, r.mode.cost_op, r.mode.price_op, r.budget,
                rho_num, rho_den, r.d.numerator, r.d.denominator,
                r.s0_size, r.s1_size, r.s2_size, r.variant,
                1 if r.feasible else 0,
            ])


def write_aggregates_csv(rows: Sequence[AggregateRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(AGGREGATES_HEADER)
        for row in rows:
            mean_rho = "nan" if row.mean_rho is None else "%.12g" % float(row.mean_rho)
            mean_d = "nan" if row.mean_d is None else "%.12g" % float(row.mean_d)
            writer.writerow([
                row.mode.cost_op, row.mode.price_op, row.budget,
                mean_rho, mean_d, row.n_feasible, row.n_infeasible,
            ])
