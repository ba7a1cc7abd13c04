"""``optrun``: run one solver configuration or an experiment preset."""

from __future__ import annotations

import argparse
import sys

from .baselines import PenaltyParams, PenaltySearchError
from .harness import (
    METHODS,
    ConfigError,
    ExperimentConfig,
    RunSpec,
    dump_trials,
    execute,
    experiment1_config,
    experiment2,
    experiment3_config,
    records_to_csv,
    rows_to_csv,
    run,
    speedup_table,
    to_json,
)
from .problem import PROBLEM_NAMES, EvaluationError
from .solver import SolverParams


def build_parser():
    ap = argparse.ArgumentParser(
        prog="optrun",
        description="Index method with local tuning for constrained global optimization.",
    )
    ap.add_argument("--problem", type=str.upper, choices=PROBLEM_NAMES)
    ap.add_argument("--dim", type=int, help="dimension of P5 (2 to 6)")
    ap.add_argument("--method", choices=METHODS, default="local-tuning")
    ap.add_argument("--r", type=float, help="reliability parameter (default 2.2)")
    ap.add_argument("--delta", type=float, help="stopping tolerance (default 1e-3)")
    ap.add_argument("--xi", type=float, default=1e-8)
    ap.add_argument("--level", type=int, default=10, help="curve level d")
    ap.add_argument("--max-iters", type=int, default=5000)
    ap.add_argument("--curve", choices=("polyline", "cells"), default="polyline")
    ap.add_argument("--seed", type=int, default=0, help="seed of the experiment-2 perturbations")
    ap.add_argument("--output", choices=("csv", "json"), default="csv")
    ap.add_argument("--timing", action="store_true", help="include wall-clock time per run")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--dump-trials", metavar="PATH")
    ap.add_argument("--experiment", type=int, choices=(1, 2, 3))
    return ap


def _params(args, r=2.2, delta=1e-3, **overrides):
    kw = dict(
        r=args.r if args.r is not None else r,
        delta=args.delta if args.delta is not None else delta,
        xi=args.xi,
        d=args.level,
        max_iterations=args.max_iters,
        curve=args.curve,
    )
    kw.update(overrides)
    return SolverParams(**kw)


def _emit(records, extra, args, out):
    if args.output == "json":
        payload = {"records": [r.as_dict(args.timing) for r in records]}
        payload.update(extra)
        out.write(to_json(payload) + "\n")
        return
    out.write(records_to_csv(records, args.timing))
    for rows in extra.values():
        if rows:
            out.write("\n" + rows_to_csv(rows))


def _main(args, out):
    if args.experiment == 1:
        cfg = experiment1_config(args.delta or 1e-3, _params(args))
        cfg = ExperimentConfig(cfg.runs, workers=args.workers)
        records = run(cfg)
        _emit(records, {"speedups": speedup_table(records)}, args, out)
    elif args.experiment == 2:
        r_values = (args.r,) if args.r is not None else (2.5, 3.0)
        table = experiment2(args.seed, r_values, params=_params(args))
        rows = table.as_rows()
        if args.output == "json":
            out.write(to_json({"seed": args.seed, "rows": rows}) + "\n")
        else:
            out.write(rows_to_csv(rows))
    elif args.experiment == 3:
        deltas = (args.delta,) if args.delta is not None else None
        dims = (args.dim,) if args.dim is not None else None
        cfg = experiment3_config(deltas, dims=dims)
        if args.r is not None:
            cfg = ExperimentConfig([RunSpec(s.problem, s.method, SolverParams(
                r=args.r, delta=s.params.delta, d=s.params.d, max_iterations=s.params.max_iterations
            ), s.dim) for s in cfg.runs])
        records = run(ExperimentConfig(cfg.runs, workers=args.workers))
        _emit(records, {}, args, out)
    else:
        if args.problem is None:
            raise ConfigError("--problem is required unless --experiment is given")
        spec = RunSpec(args.problem, args.method, _params(args), dim=args.dim,
                       penalty=PenaltyParams() if args.method == "penalty" else None)
        problem = spec.validate()
        record, result = execute(problem, spec.method, spec.params, spec.penalty)
        if args.dump_trials:
            dump_trials(result, args.dump_trials)
        _emit([record], {}, args, out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _main(args, sys.stdout)
    except (ConfigError, ValueError) as exc:
        print(f"optrun: error: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, PenaltySearchError, OSError) as exc:
        print(f"optrun: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
