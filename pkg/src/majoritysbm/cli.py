"""Command-line interface.

Subcommands: simulate, table, scan, oracle, constants, thresholds.
Exit codes: 0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys


from .analytics import ThresholdRegime, constants, threshold_delta
from .dynamics import ModelVariant
from .graph import BlockParams
from .harness import (
    TABLE_IDS,
    EmitIOError,
    ExperimentSpec,
    emit,
    reproduce_table,
    run_experiment,
    scan_phase,
)
from .oracle import build_kernel, exact_absorption, exact_halt_day1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _variant(name: str) -> ModelVariant:
    return ModelVariant(name)


def _add_output_flags(sp):
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument("--workers", type=int, default=1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="majoritysbm")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[], help="run one experiment")
    sim.add_argument("--model", choices=[v.value for v in ModelVariant])
    sim.add_argument("--n", type=int)
    group = sim.add_mutually_exclusive_group()
    group.add_argument("--delta", type=int, help="explicit initial bias")
    group.add_argument("--L", type=float, help="bias from the sweep rule")
    sim.add_argument("--p", type=float)
    sim.add_argument("--q", type=float)
    sim.add_argument("--replicates", type=int, default=1000)
    sim.add_argument("--max-rounds", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument(
        "--spec", default=None,
        help="JSON file with ExperimentSpec fields, replacing the flags",
    )
    _add_output_flags(sim)

    tab = sub.add_parser("table", help="reproduce a benchmark table")
    tab.add_argument("table_id", choices=list(TABLE_IDS))
    tab.add_argument("--replicates", type=int, default=1000)
    tab.add_argument("--seed", type=int, default=0)
    tab.add_argument("--max-rounds", type=int, default=100_000)
    _add_output_flags(tab)

    sc = sub.add_parser("scan", help="phase scan over an L grid")
    sc.add_argument("--model", choices=[v.value for v in ModelVariant],
                    default=ModelVariant.NON_MARKOVIAN.value)
    sc.add_argument("--n", type=int, required=True)
    sc.add_argument("--p", type=float, required=True)
    sc.add_argument("--q", type=float, required=True)
    sc.add_argument("--L-from", type=float, required=True)
    sc.add_argument("--L-to", type=float, required=True)
    sc.add_argument("--L-step", type=float, required=True)
    sc.add_argument("--replicates", type=int, default=1000)
    sc.add_argument("--max-rounds", type=int, default=100_000)
    sc.add_argument("--seed", type=int, default=0)
    _add_output_flags(sc)

    orc = sub.add_parser("oracle", help="exact kernel/absorption at tiny scale")
    orc.add_argument("--n", type=int, required=True)
    orc.add_argument("--delta", type=int, required=True)
    orc.add_argument("--p", type=float, required=True)
    orc.add_argument("--q", type=float, required=True)

    con = sub.add_parser("constants", help="closed-form model constants")
    con.add_argument("--p", type=float, required=True)
    con.add_argument("--q", type=float, required=True)

    thr = sub.add_parser("thresholds", help="initial-bias threshold rules")
    thr.add_argument("--n", type=int, required=True)
    thr.add_argument("--p", type=float, required=True)
    thr.add_argument("--q", type=float, required=True)
    thr.add_argument(
        "--regime", required=True, choices=[r.value for r in ThresholdRegime]
    )
    thr.add_argument("--L", type=float, default=None)
    thr.add_argument("--delta-param", type=float, default=None)
    thr.add_argument("--d-n", type=float, default=None)
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    if args.spec is not None:
        with open(args.spec, encoding="utf-8") as fh:
            obj = json.load(fh)
        variant = ModelVariant(obj["variant"])
        params = BlockParams(obj["p"], obj["q"])
        common = dict(
            replicates=obj.get("replicates", 1000),
            max_rounds=obj.get("max_rounds", 100_000),
            master_seed=obj.get("master_seed", 0),
        )
        if "delta" in obj:
            return ExperimentSpec(variant, obj["n"], obj["delta"], params, **common)
        return ExperimentSpec.from_sweep(variant, obj["n"], obj["L"], params, **common)
    missing = [k for k in ("model", "n", "p", "q") if getattr(args, k) is None]
    if missing:
        raise ValueError(f"missing required flags: {', '.join('--' + m for m in missing)}")
    if args.delta is None and args.L is None:
        raise ValueError("need --delta or --L")
    params = BlockParams(args.p, args.q)
    if args.delta is not None:
        return ExperimentSpec(
            _variant(args.model), args.n, args.delta, params,
            args.replicates, args.max_rounds, args.seed,
        )
    return ExperimentSpec.from_sweep(
        _variant(args.model), args.n, args.L, params,
        args.replicates, args.max_rounds, args.seed,
    )


def _cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    report = run_experiment(spec, workers=args.workers)
    emit([report], fmt=args.format, destination=args.out)
    return 0


def _cmd_table(args) -> int:
    reports = reproduce_table(
        args.table_id,
        replicates=args.replicates,
        master_seed=args.seed,
        max_rounds=args.max_rounds,
        workers=args.workers,
    )
    emit(reports, fmt=args.format, destination=args.out)
    return 0


def _cmd_scan(args) -> int:
    if args.L_step <= 0 or args.L_to < args.L_from:
        raise ValueError("need L_from <= L_to and L_step > 0")
    grid = []
    x = args.L_from
    while x <= args.L_to + 1e-12:
        grid.append(round(x, 12))
        x += args.L_step
    result = scan_phase(
        ModelVariant(args.model), args.n, args.p, args.q, grid,
        args.replicates, args.max_rounds, args.seed, workers=args.workers,
    )
    emit(result.reports(), fmt=args.format, destination=args.out)
    if result.crossing is not None:
        sys.stderr.write(
            f"plus-win frequency crosses 1/2 for L in "
            f"[{result.crossing[0]:g}, {result.crossing[1]:g}]\n"
        )
    return 0


def _cmd_oracle(args) -> int:
    total = 2 * args.n + args.delta
    kernel = build_kernel(total, args.p, args.q)
    absorption = exact_absorption(args.n, args.delta, args.p, args.q)
    halt = exact_halt_day1(args.n, args.delta, args.p, args.q) if args.n >= 1 else None
    obj = {
        "vertices": total,
        "kernel": [list(map(float, row)) for row in kernel.matrix],
        "no_flip": list(map(float, kernel.no_flip)),
        "absorption": {
            "prob_plus_wins": None
            if not absorption.absorbing_reachable
            else absorption.prob_plus_wins,
            "absorbing_reachable": absorption.absorbing_reachable,
            "expected_days": None
            if not absorption.absorbing_reachable
            else absorption.expected_days,
        },
        "halt_day1": halt,
    }
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_constants(args) -> int:
    c = constants(args.p, args.q)
    json.dump({"h": c.h, "c": c.c, "c_prime": c.c_prime}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_thresholds(args) -> int:
    delta = threshold_delta(
        args.n,
        args.p,
        args.q,
        ThresholdRegime(args.regime),
        L=args.L,
        delta_param=args.delta_param,
        d_n=args.d_n,
    )
    json.dump(
        {"regime": args.regime, "n": args.n, "p": args.p, "q": args.q, "delta": delta},
        sys.stdout,
        indent=2,
    )
    sys.stdout.write("\n")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "table": _cmd_table,
    "scan": _cmd_scan,
    "oracle": _cmd_oracle,
    "constants": _cmd_constants,
    "thresholds": _cmd_thresholds,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except EmitIOError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
