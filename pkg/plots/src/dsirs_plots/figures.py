"""Render budget-sweep figures from the experiment CSV files.

Input is the aggregates.csv written by the sweep (one row per mode pair and
budget). When the raw results.csv sits next to it, per-group means are
recomputed from scratch and any disagreement beyond 1e-9 relative aborts
rendering: the figures must never drift from the data they claim to show.
Infinite-ratio records (infeasible cells) carry no mean and are excluded,
with the exclusion count annotated on the figure.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import EmptyData, MeanMismatch, SchemaMismatch  # noqa: E402

AGGREGATES_HEADER = [
    "mode_cost", "mode_price", "budget",
    "mean_rho", "mean_d", "n_feasible", "n_infeasible",
]
RESULTS_HEADER = [
    "instance_id", "mode_cost", "mode_price", "budget",
    "rho_num", "rho_den", "d_num", "d_den",
    "s0_size", "s1_size", "s2_size", "variant", "feasible",
]

REL_TOL = 1e-9
_DPI = 150


@dataclass(frozen=True)
class AggregateRow:
    mode_cost: str
    mode_price: str
    budget: int
    mean_rho: float
    mean_d: float
    n_feasible: int
    n_infeasible: int

    @property
    def mode_label(self) -> str:
        return f"({self.mode_cost}, {self.mode_price})"


def read_aggregates(path) -> list[AggregateRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != AGGREGATES_HEADER:
            raise SchemaMismatch(
                f"{path}: expected header {AGGREGATES_HEADER}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(AGGREGATES_HEADER):
                raise SchemaMismatch(f"{path} line {lineno}: {len(row)} fields")
            try:
                rows.append(AggregateRow(
                    mode_cost=row[0],
                    mode_price=row[1],
                    budget=int(row[2]),
                    mean_rho=float(row[3]),
                    mean_d=float(row[4]),
                    n_feasible=int(row[5]),
                    n_infeasible=int(row[6]),
                ))
            except ValueError as exc:
                raise SchemaMismatch(f"{path} line {lineno}: {exc}") from None
    if not rows:
        raise EmptyData(f"{path}: no aggregate rows")
    return rows


def _read_results(path):
    """Raw sweep rows as (group key, rho Fraction or None, feasible flag)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULTS_HEADER:
            raise SchemaMismatch(
                f"{path}: expected header {RESULTS_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(RESULTS_HEADER):
                raise SchemaMismatch(f"{path} line {lineno}: {len(row)} fields")
            key = (row[1], row[2], int(row[3]))
            feasible = row[12] == "1"
            try:
                rho = Fraction(int(row[4]), int(row[5])) if feasible else None
                d = Fraction(int(row[6]), int(row[7]))
            except ValueError as exc:
                raise SchemaMismatch(f"{path} line {lineno}: {exc}") from None
            out.append((key, rho, d, feasible))
    return out


def _close(stated: float, recomputed) -> bool:
    if recomputed is None:
        return math.isnan(stated)
    if math.isnan(stated):
        return False
    return abs(float(recomputed) - stated) <= REL_TOL * max(abs(stated), 1.0)


def crosscheck(aggregates: list[AggregateRow], results) -> None:
    """Recompute every group mean from the raw rows; abort on disagreement."""
    groups: dict = {}
    for key, rho, d, feasible in results:
        groups.setdefault(key, []).append((rho, d, feasible))
    seen = set()
    for agg in aggregates:
        key = (agg.mode_cost, agg.mode_price, agg.budget)
        seen.add(key)
        rows = groups.get(key)
        if rows is None:
            raise MeanMismatch(f"group {key}: in aggregates but not in results")
        feas = [(rho, d) for rho, d, feasible in rows if feasible]
        if (len(feas), len(rows) - len(feas)) != (agg.n_feasible, agg.n_infeasible):
            raise MeanMismatch(
                f"group {key}: counts {len(feas)}/{len(rows) - len(feas)} do not "
                f"match aggregates {agg.n_feasible}/{agg.n_infeasible}")
        mean_rho = sum((r for r, _ in feas), Fraction(0)) / len(feas) if feas else None
        mean_d = sum((d for _, d in feas), Fraction(0)) / len(feas) if feas else None
        if not _close(agg.mean_rho, mean_rho):
            raise MeanMismatch(
                f"group {key}: mean_rho {agg.mean_rho!r} vs recomputed "
                f"{None if mean_rho is None else float(mean_rho)!r}")
        if not _close(agg.mean_d, mean_d):
            raise MeanMismatch(
                f"group {key}: mean_d {agg.mean_d!r} vs recomputed "
                f"{None if mean_d is None else float(mean_d)!r}")
    extra = set(groups) - seen
    if extra:
        raise MeanMismatch(f"groups {sorted(extra)} in results but not in aggregates")


def series_from_rows(rows: list[AggregateRow], metric: str) -> dict:
    """Label -> (budgets, values) in first-seen order, budgets ascending."""
    out: dict = {}
    for row in rows:
        out.setdefault(row.mode_label, []).append(
            (row.budget, getattr(row, metric)))
    return {
        label: tuple(zip(*sorted(points)))
        for label, points in out.items()
    }


def _draw(rows, metric, ylabel, title, path, fmt):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, (budgets, values) in series_from_rows(rows, metric).items():
        ax.plot(budgets, values, marker="o", label=label)
    ax.set_xlabel("budget")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    excluded = sum(r.n_infeasible for r in rows)
    if excluded:
        fig.text(0.99, 0.01, f"{excluded} infinite-ratio records excluded",
                 ha="right", va="bottom", fontsize=7)
    fig.tight_layout()
    metadata = {"Date": None} if fmt == "svg" else {}
    fig.savefig(path, dpi=_DPI, metadata=metadata)
    plt.close(fig)


def render(aggregates_csv, out_dir, fmt: str = "png") -> list[Path]:
    """Write mean_rho_vs_budget and mean_d_vs_budget next to each other.

    Reads aggregates_csv; when a results.csv sits in the same directory the
    aggregate means are re-derived from it first and any mismatch raises.
    """
    if fmt not in ("png", "svg"):
        raise ValueError(f"unsupported format {fmt!r}")
    aggregates_csv = Path(aggregates_csv)
    rows = read_aggregates(aggregates_csv)
    results_path = aggregates_csv.parent / "results.csv"
    if results_path.exists():
        crosscheck(rows, _read_results(results_path))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plt.rcParams["svg.hashsalt"] = "dsirs-plots"
    written = []
    for metric, ylabel, title, stem in (
        ("mean_rho", "mean welfare ratio",
         "Mean welfare ratio vs budget", "mean_rho_vs_budget"),
        ("mean_d", "mean welfare difference",
         "Mean welfare difference vs budget", "mean_d_vs_budget"),
    ):
        path = out_dir / f"{stem}.{fmt}"
        _draw(rows, metric, ylabel, title, path, fmt)
        written.append(path)
    return written
