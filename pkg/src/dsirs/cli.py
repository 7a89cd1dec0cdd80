"""Command-line front door for batch use.

Subcommands: validate an instance file, run classic Adjusted Winner, solve
an exact objective, run the min-ratio approximation, query the brute-force
oracle, run a budget-sweep experiment, or generate synthetic utility
matrices. Results print as JSON on standard output; simulate writes CSV
files instead. Exit codes: 0 success, 2 no feasible plan, 1 bad input
(including unparsable flags), with a diagnostic on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .adjusted_winner import aw_derived_plan, classic_aw
from .errors import DsirsError, Infeasible, ValidationError
from .exact import EnvyFreeReport, Objective, oracle_best_plan, solve_awns_exact
from .fptas import fptas_awns_rho
from .model import UNSELLABLE, Plan, load_instance
from .scaling import to_eps
from .simulation import (
    SweepConfig,
    aggregate,
    load_utility_matrices,
    run_sweep,
    synthesize_matrices,
    write_aggregates_csv,
    write_results_csv,
    write_utility_matrices,
)

# short flag values -> library objective / criterion names
OBJECTIVES = {
    "d": "min-d",
    "rho": "min-rho",
    "nw": "max-nash",
    "d-c": "min-cost-given-d",
    "rho-c": "min-cost-given-rho",
}
CRITERIA = {
    "min-d": "min-d",
    "min-rho": "min-rho",
    "envy-free": "exists-envy-free",
    "max-nash": "max-nash",
}

_CONFIG_KEYS = {
    "matrices", "first_n", "budgets", "seed", "epsilon", "dominance_threshold",
}


def _parse_fraction(text: str) -> Fraction:
    """Exact rational from a decimal ("0.1") or ratio ("1/10") string."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def _frac(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _cost_json(cost):
    return "inf" if cost == UNSELLABLE else int(cost)


def _plan_json(plan: Plan) -> dict:
    return {
        "s0": sorted(plan.s0),
        "s1": sorted(plan.s1),
        "s2": sorted(plan.s2),
        "q": _frac(plan.q),
    }


def _result_json(res) -> dict:
    out = {
        "plans": [_plan_json(p) for p in res.plans],
        "objective": _frac(res.objective),
        "cost": _cost_json(res.cost),
        "solver": res.solver,
    }
    if res.epsilon is not None:
        out["epsilon"] = _frac(res.epsilon)
    return out


def _cmd_validate(args) -> dict:
    inst = load_instance(args.instance)
    return {
        "ok": True,
        "resources": inst.n,
        "budget": _cost_json(inst.budget),
    }


def _cmd_aw(args) -> dict:
    inst = load_instance(args.instance)
    sell = frozenset(x for x in (args.sell or "").split(",") if x)
    unknown = sell - set(inst.names())
    if unknown:
        raise ValidationError(f"--sell names unknown resources: {sorted(unknown)}")
    outcome = classic_aw(inst)
    split = None
    if outcome.split is not None:
        name, fraction = outcome.split
        split = {"name": name, "fraction": _frac(fraction)}
    return {
        "classic": {
            "s1": sorted(outcome.s1),
            "s2": sorted(outcome.s2),
            "split": split,
            "w1": _frac(outcome.w1),
            "w2": _frac(outcome.w2),
            "transfers": list(outcome.transfers),
        },
        "plan": _plan_json(aw_derived_plan(sell, inst)),
    }


def _cmd_solve(args) -> dict:
    inst = load_instance(args.instance)
    threshold = _parse_fraction(args.threshold) if args.threshold else None
    objective = Objective(OBJECTIVES[args.objective], threshold)
    return _result_json(solve_awns_exact(inst, objective))


def _cmd_fptas(args) -> dict:
    inst = load_instance(args.instance)
    return _result_json(fptas_awns_rho(inst, to_eps(_parse_fraction(args.epsilon))))


def _cmd_oracle(args) -> dict:
    inst = load_instance(args.instance)
    res = oracle_best_plan(inst, CRITERIA[args.criterion])
    if isinstance(res, EnvyFreeReport):
        return {
            "exists": res.exists,
            "plans": [_plan_json(p) for p in res.plans],
            "solver": res.solver,
        }
    return _result_json(res)


def _cmd_simulate(args) -> dict:
    conf = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            conf = json.load(fh)
        if not isinstance(conf, dict):
            raise ValidationError("config must be a JSON object")
        unknown = set(conf) - _CONFIG_KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")

    seed = args.seed if args.seed is not None else conf.get("seed", 42)
    if args.epsilon is not None:
        eps = to_eps(_parse_fraction(args.epsilon))
    else:
        eps = to_eps(_parse_fraction(str(conf.get("epsilon", "0.1"))))

    if args.config:
        matrices = load_utility_matrices(
            conf["matrices"], first_n=conf.get("first_n", 5000)
        )
    else:
        matrices = synthesize_matrices(args.synthetic, seed)

    config = SweepConfig(
        matrices=matrices,
        budgets=tuple(conf.get("budgets", SweepConfig.budgets)),
        eps=eps,
        seed=seed,
        dominance_threshold=conf.get("dominance_threshold", 10),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = run_sweep(config)
    rows = aggregate(records)
    results_path = out_dir / "results.csv"
    aggregates_path = out_dir / "aggregates.csv"
    write_results_csv(records, results_path)
    write_aggregates_csv(rows, aggregates_path)
    return {
        "instances": len(matrices),
        "records": len(records),
        "results": str(results_path),
        "aggregates": str(aggregates_path),
    }


def _cmd_gen(args) -> dict:
    matrices = synthesize_matrices(args.count, args.seed)
    write_utility_matrices(matrices, args.out)
    return {"written": len(matrices), "out": str(args.out)}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsirs",
        description="Budgeted dispute settlement with indivisible resources and sale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file's invariants")
    p.add_argument("--instance", required=True)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("aw", help="classic Adjusted Winner and the derived plan")
    p.add_argument("--instance", required=True)
    p.add_argument("--sell", default="", help="comma-separated resource names to sell")
    p.set_defaults(handler=_cmd_aw)

    p = sub.add_parser("solve", help="exact optimum over the derived-plan family")
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", required=True, choices=sorted(OBJECTIVES))
    p.add_argument("--threshold", help="bound for the cost-constrained objectives")
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("fptas", help="approximate the minimum welfare ratio")
    p.add_argument("--instance", required=True)
    p.add_argument("--epsilon", required=True, help="decimal or num/den")
    p.set_defaults(handler=_cmd_fptas)

    p = sub.add_parser("oracle", help="brute-force optimum over all tripartitions")
    p.add_argument("--instance", required=True)
    p.add_argument("--criterion", required=True, choices=sorted(CRITERIA))
    p.set_defaults(handler=_cmd_oracle)

    p = sub.add_parser("simulate", help="budget sweep over utility matrices")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON config naming a matrices CSV")
    src.add_argument("--synthetic", type=int, help="synthesize this many matrices")
    p.add_argument("--out", required=True, help="directory for results/aggregates CSV")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--epsilon", default=None, help="decimal or num/den")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("gen", help="write synthetic utility matrices as CSV")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed a diagnostic; bad flags are input errors
        return 0 if exc.code in (0, None) else 1
    try:
        payload = args.handler(args)
    except Infeasible as exc:
        print(f"Infeasible: {exc}", file=sys.stderr)
        return 2
    except (DsirsError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
