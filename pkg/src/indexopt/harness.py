"""Experiment runner: run records, speed-up indexes, annulus success statistics
and trial dumps.

Every cell of an :class:`ExperimentConfig` is a (problem, method, params)
triple that runs independently; records come back in config order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .baselines import PenaltyParams, solve_penalty, solve_strongin_markin
from .problem import annulus_problem, get_problem, grid_reference_solution, perturbed_annulus
from .solver import SolverParams, solve

METHODS = ("local-tuning", "strongin-markin", "penalty")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def fmt_float(v):
    """17 significant digits; empty string for ``None``."""
    if v is None:
        return ""
    return format(float(v), ".17g")


# --------------------------------------------------------------------------
# Records


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one (problem, method, params) cell.

    For the penalty method the counters add up every attempt and
    ``iterations`` is the trial count of the accepted attempt.
    """

    problem: str
    method: str
    params: dict
    n_constraint: tuple
    n_objective: int
    iterations: int
    phi_c: Optional[float]
    y_c: Optional[tuple]
    stop_reason: str
    wall_time: float = 0.0
    p_star: Optional[float] = None
    attempts: Optional[int] = None

    @property
    def n_1(self):
        return self.n_constraint[0] if self.n_constraint else self.n_objective

    @property
    def total_evaluations(self):
        return sum(self.n_constraint) + self.n_objective

    def as_dict(self, timing=False):
        d = {
            "problem": self.problem,
            "method": self.method,
            **self.params,
            "iterations": self.iterations,
            "n_constraint": list(self.n_constraint),
            "n_objective": self.n_objective,
            "phi_c": self.phi_c,
            "y_c": None if self.y_c is None else list(self.y_c),
            "stop_reason": self.stop_reason,
            "p_star": self.p_star,
            "attempts": self.attempts,
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d


@dataclass(frozen=True)
class RunSpec:
    """One cell of an experiment."""

    problem: str
    method: str = "local-tuning"
    params: SolverParams = field(default_factory=SolverParams)
    dim: Optional[int] = None
    penalty: Optional[PenaltyParams] = None

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        try:
            problem = get_problem(self.problem, self.dim)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc.args[0] if exc.args else exc)) from None
        if problem.dim * self.params.d > 52:
            raise ConfigError(
                f"level {self.params.d} with N = {problem.dim} exceeds 52 bits; lower --level"
            )
        return problem


@dataclass(frozen=True)
class ExperimentConfig:
    runs: tuple
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(self.runs))
        if not self.runs:
            raise ConfigError("an experiment needs at least one run")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def params_echo(params):
    return {
        "r": params.r,
        "delta": params.delta,
        "xi": params.xi,
        "d": params.d,
        "max_iterations": params.max_iterations,
    }


def execute(problem, method, params, penalty=None):
    """Solve ``problem`` with ``method``; return ``(record, result)``."""
    start = time.perf_counter()
    p_star = attempts = None
    if method == "local-tuning":
        result = solve(problem, params)
    elif method == "strongin-markin":
        result = solve_strongin_markin(problem, params)
    elif method == "penalty":
        penalty = replace(penalty or PenaltyParams(), inner=params)
        outcome = solve_penalty(problem, penalty)
        result, p_star, attempts = outcome.result, outcome.p_star, outcome.attempts
    else:
        raise ConfigError(f"unknown method {method!r}")
    elapsed = time.perf_counter() - start
    record = RunRecord(
        problem=problem.name,
        method=method,
        params=params_echo(params),
        n_constraint=tuple(result.counters.n_constraint),
        n_objective=result.counters.n_objective,
        iterations=result.iterations,
        phi_c=result.best_value,
        y_c=None if result.best_point is None else tuple(float(v) for v in result.best_point),
        stop_reason=result.stop_reason,
        wall_time=elapsed,
        p_star=p_star,
        attempts=attempts,
    )
    return record, result


def _run_cell(spec):
    return execute(spec.validate(), spec.method, spec.params, spec.penalty)[0]


def run(config):
    """Execute every cell of ``config``; records are returned in config order."""
    for spec in config.runs:
        spec.validate()
    if config.workers == 1:
        return [_run_cell(spec) for spec in config.runs]
    with ProcessPoolExecutor(config.workers) as pool:
        return list(pool.map(_run_cell, config.runs))


# --------------------------------------------------------------------------
# Serialization


def records_to_csv(records, timing=False):
    """CSV text with one row per record; counters padded to the widest ``m``."""
    width = max((len(r.n_constraint) for r in records), default=0)
    dim = max((len(r.y_c) for r in records if r.y_c is not None), default=0)
    header = ["problem", "method", "r", "delta", "xi", "d", "max_iterations", "iterations"]
    header += [f"n_{i}" for i in range(1, width + 1)] + ["n_phi", "phi_c"]
    header += [f"y{i}" for i in range(1, dim + 1)] + ["stop_reason", "p_star", "attempts"]
    if timing:
        header.append("wall_time")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        p = rec.params
        row = [rec.problem, rec.method, fmt_float(p["r"]), fmt_float(p["delta"]),
               fmt_float(p["xi"]), p["d"], p["max_iterations"], rec.iterations]
        row += list(rec.n_constraint) + [""] * (width - len(rec.n_constraint))
        row += [rec.n_objective, fmt_float(rec.phi_c)]
        y = list(rec.y_c or ())
        row += [fmt_float(v) for v in y] + [""] * (dim - len(y))
        row += [rec.stop_reason, fmt_float(rec.p_star), "" if rec.attempts is None else rec.attempts]
        if timing:
            row.append(fmt_float(rec.wall_time))
        writer.writerow(row)
    return buf.getvalue()


def rows_to_csv(rows):
    """CSV text for a list of flat dicts sharing the same keys."""
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, float) else v for v in row.values()])
    return buf.getvalue()


def to_json(obj):
    """JSON text with every float written to 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# --------------------------------------------------------------------------
# Speed-up indexes


@dataclass(frozen=True)
class SpeedupReport:
    """``s1``: ratio of ``n_1``; ``s2``: ratio of objective evaluations;
    ``s3``: ratio of all evaluations (baseline over candidate)."""

    s1: float
    s2: float
    s3: float


def _ratio(a, b, what):
    if b == 0:
        raise ValueError(f"candidate has zero {what}; speed-up undefined")
    return a / b


def speedup(baseline, candidate):
    if baseline.problem != candidate.problem:
        raise ValueError(f"records are for different problems: {baseline.problem} vs {candidate.problem}")
    return SpeedupReport(
        _ratio(baseline.n_1, candidate.n_1, "n_1"),
        _ratio(baseline.n_objective, candidate.n_objective, "objective evaluations"),
        _ratio(baseline.total_evaluations, candidate.total_evaluations, "evaluations"),
    )


def speedup_table(records):
    """Speed-ups of local tuning over each baseline sharing problem and params.

    ``S`` rows compare with the global-estimate method, ``S_hat`` rows with
    the penalty method.
    """
    def key(rec):
        return rec.problem, tuple(sorted(rec.params.items()))

    candidates = {key(r): r for r in records if r.method == "local-tuning"}
    rows = []
    for rec in records:
        cand = candidates.get(key(rec))
        if cand is None or rec.method == "local-tuning":
            continue
        try:
            s = speedup(rec, cand)
        except ValueError:
            continue
        kind = "S" if rec.method == "strongin-markin" else "S_hat"
        rows.append({"problem": rec.problem, "delta": float(rec.params["delta"]),
                     "index": kind, "s1": s.s1, "s2": s.s2, "s3": s.s3})
    return rows


# --------------------------------------------------------------------------
# Presets


def experiment1_config(delta=1e-3, base=None, methods=METHODS):
    base = replace(base or SolverParams(), delta=delta)
    return ExperimentConfig(
        [RunSpec(name, method, base) for name in ("P1", "P2", "P3", "P4") for method in methods]
    )


#: (N, r, deltas) for the variable-dimension problem.
EXPERIMENT3_GRID = (
    (2, 2.35, (1e-3, 1e-4)),
    (3, 2.45, (1e-3, 1e-4)),
    (4, 2.7, (1e-3, 1e-4)),
    (5, 3.3, (1e-3, 1e-4)),
    (6, 3.35, (1e-3, 1e-4, 5e-5)),
)


def experiment3_params(N, r, delta, max_iterations=40000):
    # d * N must stay within a double mantissa: 10 up to N = 5, 8 for N = 6
    return SolverParams(r=r, delta=delta, d=10 if N <= 5 else 8, max_iterations=max_iterations)


def experiment3_config(deltas=None, methods=("local-tuning", "strongin-markin"), dims=None):
    runs = []
    for N, r, grid_deltas in EXPERIMENT3_GRID:
        if dims is not None and N not in dims:
            continue
        for delta in deltas or grid_deltas:
            for method in methods:
                runs.append(RunSpec("P5", method, experiment3_params(N, r, delta), dim=N))
    return ExperimentConfig(runs)


# --------------------------------------------------------------------------
# Experiment 2


@dataclass(frozen=True)
class AnnulusOutcome:
    problem: str
    method: str
    r: float
    phi_c: Optional[float]
    phi_grid: float
    success: bool
    record: RunRecord = field(repr=False)


@dataclass(frozen=True)
class Experiment2Row:
    method: str
    r: float
    successes: int
    count: int
    mean_n1: float
    mean_n2: float
    mean_nphi: float
    mean_total: float


@dataclass(frozen=True)
class Experiment2Table:
    rows: tuple
    outcomes: tuple

    def row(self, method, r):
        for row in self.rows:
            if row.method == method and row.r == r:
                return row
        raise KeyError((method, r))

    def as_rows(self):
        """Flat rows; local-tuning rows carry speed-ups over the baseline at the same ``r``."""
        out = []
        for row in self.rows:
            d = {"method": row.method, "r": float(row.r), "successes": row.successes,
                 "count": row.count, "n1_mean": row.mean_n1, "n2_mean": row.mean_n2,
                 "nphi_mean": row.mean_nphi, "s1": "", "s2": "", "s3": ""}
            if row.method == "local-tuning":
                try:
                    base = self.row("strongin-markin", row.r)
                    d.update(s1=base.mean_n1 / row.mean_n1, s2=base.mean_nphi / row.mean_nphi,
                             s3=base.mean_total / row.mean_total)
                except (KeyError, ZeroDivisionError):
                    pass
            out.append(d)
        return out


def experiment2(seed, r_values=(2.5, 3.0), count=20, params=None,
                methods=("strongin-markin", "local-tuning"), grid=1000, tolerance=0.05,
                offsets=None):
    """Solve shifted-annulus problems and count runs matching the grid optimum.

    ``offsets`` overrides the seeded center shifts (one ``(dx, dy)`` per
    problem).  A run succeeds when it returns a feasible value within
    ``tolerance`` of the best feasible node of a ``grid x grid`` mesh.
    """
    params = params or SolverParams(delta=1e-3)
    if offsets is None:
        problems = perturbed_annulus(seed, count)
    else:
        problems = [annulus_problem((2.2 + dx, 1.2 + dy), name=f"P2-shift{i + 1:02d}")
                    for i, (dx, dy) in enumerate(offsets)]
    oracle = []
    for p in problems:
        ref = grid_reference_solution(p, grid)
        if ref is None:
            raise RuntimeError(f"{p.name}: no feasible grid node")
        oracle.append(ref[1])
    rows, outcomes = [], []
    for r in r_values:
        prm = replace(params, r=r)
        for method in methods:
            recs = []
            for p, phi_grid in zip(problems, oracle):
                rec, _ = execute(p, method, prm)
                ok = rec.phi_c is not None and abs(rec.phi_c - phi_grid) <= tolerance
                outcomes.append(AnnulusOutcome(p.name, method, r, rec.phi_c, phi_grid, ok, rec))
                recs.append(rec)
            rows.append(Experiment2Row(
                method, r,
                successes=sum(o.success for o in outcomes[-len(recs):]),
                count=len(recs),
                mean_n1=float(np.mean([x.n_constraint[0] for x in recs])),
                mean_n2=float(np.mean([x.n_constraint[1] for x in recs])),
                mean_nphi=float(np.mean([x.n_objective for x in recs])),
                mean_total=float(np.mean([x.total_evaluations for x in recs])),
            ))
    return Experiment2Table(tuple(rows), tuple(outcomes))


# --------------------------------------------------------------------------
# Trial dumps


def dump_trials(result, path):
    """Write ``k,x,y1,...,yN,index,value``, one row per trial in evaluation order."""
    log = result.trial_log
    if not log:
        raise ValueError("result has no trials to dump")
    N = len(log[0][1])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "x"] + [f"y{i}" for i in range(1, N + 1)] + ["index", "value"])
        for k, (x, y, index, value) in enumerate(log):
            writer.writerow([k, fmt_float(x)] + [fmt_float(v) for v in y] + [index, fmt_float(value)])
    return path
