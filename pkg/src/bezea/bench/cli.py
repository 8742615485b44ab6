"""Command-line entry point: ``bench run``, ``bench scalability`` and ``bench refset``."""

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from bezea.bench.experiment import (
    ALGORITHMS,
    PROFILES,
    SCALABILITY_DIMS,
    ExperimentConfig,
    run_experiments,
    scalability_suite,
)
from bezea.bench.outputs import emit_outputs
from bezea.problems import PROBLEM_NAMES, REFSET_SIZE, ConfigurationError, make_problem, write_reference_set
from bezea.set_bezea import DIVERSITY_MODES

OUT_ENV = "BENCH_OUT"
DEFAULT_OUT = "bench_out"

log = logging.getLogger("bench")


def _default_out() -> str:
    return os.environ.get(OUT_ENV, DEFAULT_OUT)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Benchmark Bézier-curve multi-modal optimizers.")
    parser.add_argument("--config", type=Path, help="JSON file of option values; they override flags")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="repeated runs with indicators and significance marks")
    run.add_argument("--problem", required=True, help=f"one of {', '.join(PROBLEM_NAMES)}")
    run.add_argument("--dim", type=int, default=2)
    run.add_argument("--algo", nargs="+", default=["mm-bezea"], choices=ALGORITHMS)
    run.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    run.add_argument("--budget", type=int, help="evaluations per run (default from --profile)")
    run.add_argument("--reps", type=int, help="repetitions (default from --profile)")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--b", type=int, default=2, help="curves per set solution")
    run.add_argument("--restart-doubling", action="store_true")
    run.add_argument("--diversity", choices=DIVERSITY_MODES, default="one-minus-cos")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or {DEFAULT_OUT})")

    scal = sub.add_parser("scalability", help="OmniTest over growing dimensions")
    scal.add_argument("--dims", type=int, nargs="+", default=list(SCALABILITY_DIMS))
    scal.add_argument("--b", type=int, nargs="+", default=[2, 3, 4])
    scal.add_argument("--budget-per-dim", type=int, default=100_000)
    scal.add_argument("--reps", type=int, default=5)
    scal.add_argument("--seed", type=int, default=0)
    scal.add_argument("--workers", type=int, default=1)
    scal.add_argument("--out", default=None)

    ref = sub.add_parser("refset", help="write a problem's reference Pareto set as CSV")
    ref.add_argument("--problem", required=True)
    ref.add_argument("--dim", type=int, default=2)
    ref.add_argument("--n", type=int, default=REFSET_SIZE)
    ref.add_argument("--out", default=None)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            overrides = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(overrides, dict):
            parser.error(f"config {args.config} must hold a JSON object")
        for key, value in overrides.items():
            name = key.replace("-", "_")
            if not hasattr(args, name):
                parser.error(f"unknown option {key!r} in {args.config}")
            setattr(args, name, value)
    if args.out is None:
        args.out = _default_out()
    return args


def _cmd_run(args) -> int:
    profile = PROFILES[args.profile]
    base = ExperimentConfig(
        problem=args.problem, dim=args.dim,
        budget=args.budget if args.budget is not None else profile["budget"],
        reps=args.reps if args.reps is not None else profile["reps"],
        seed=args.seed, b=args.b, restart_doubling=args.restart_doubling,
        diversity=args.diversity, out_dir=args.out, workers=args.workers,
    )
    algos = [args.algo] if isinstance(args.algo, str) else args.algo
    configs = [replace(base, algorithm=a) for a in algos]
    table, records = run_experiments(configs)
    emit_outputs(table, records, args.out)
    for row in table.rows():
        print(f"{row['problem']:>12} {row['algorithm']:>14} {row['indicator']:>12} "
              f"{row['mean']:.4e} (±{row['std']:.2e})")
    log.info("wrote results to %s", args.out)
    return 0


def _cmd_scalability(args) -> int:
    rows, records = scalability_suite(args.dims, args.b, args.budget_per_dim, args.reps, args.seed, args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "scalability.csv").open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for row in rows:
        print(f"{row['algorithm']:>14} dim={row['dim']:<4} hv min/mean/max "
              f"{row['hv_min']:.3e}/{row['hv_mean']:.3e}/{row['hv_max']:.3e} sets={row['n_sets']:.1f} "
              f"smooth={row['smoothness']:.3f}")
    return 0


def _cmd_refset(args) -> int:
    problem = make_problem(args.problem, args.dim)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_reference_set(problem, out / f"refset_{problem.name}-{problem.dim}.csv", args.n)
    print(path)
    return 0


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "scalability": _cmd_scalability, "refset": _cmd_refset}
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
