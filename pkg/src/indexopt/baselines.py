"""Comparison methods: the index algorithm without local tuning, and the
box-constrained information algorithm applied to a penalized objective."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import ConstrainedProblem, EvalCounters
from .solver import SolverParams, SolverResult, run_search


class PenaltySearchError(RuntimeError):
    """No probed penalty coefficient produced a feasible answer."""


def solve_strongin_markin(problem, params=None, callback=None):
    """Index information algorithm with one global Hölder estimate per index.

    Identical to :func:`indexopt.solver.solve` except that every interval
    uses ``M_i = max(mu_j, xi)`` for its larger end index ``j``.
    """
    return run_search(problem, params or SolverParams(), False, callback)


def penalized_objective(problem, p):
    """Unconstrained problem ``phi(y) + p * max(G_1(y), ..., G_m(y), 0)``."""
    constraints = problem.constraints
    objective = problem.objective

    def phi_p(y):
        penalty = 0.0
        for g in constraints:
            penalty = np.maximum(penalty, g(y))
        return objective(y) + p * penalty

    return ConstrainedProblem(
        f"{problem.name}-penalty{p:g}", problem.domain, (), phi_p,
        known_solution=problem.known_solution,
    )


def is_feasible(problem, y, tolerance=0.0):
    return all(float(g(y)) <= tolerance for g in problem.constraints)


@dataclass(frozen=True)
class PenaltyParams:
    initial_p: float = 0.1
    increment: float = 0.1
    feasibility_tolerance: float = 0.0
    max_attempts: int = 100
    inner: SolverParams = field(default_factory=SolverParams)
    local_tuning: bool = False

    def __post_init__(self):
        if not self.initial_p > 0.0:
            raise ValueError("initial_p must be positive")
        if not self.increment > 0.0:
            raise ValueError("increment must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


@dataclass(frozen=True)
class PenaltyOutcome:
    result: SolverResult
    p_star: float
    attempts: int


def solve_penalty(problem, params=None, callback=None):
    """Raise the penalty coefficient until the penalized minimizer is feasible.

    Each attempt restarts the search from scratch.  The returned counters
    cover every attempt; every trial costs one evaluation of each constraint
    and of the objective.  ``callback`` is passed to every inner search.
    """
    params = params or PenaltyParams()
    total = EvalCounters.for_problem(problem)
    for attempt in range(1, params.max_attempts + 1):
        # repeated addition drifts (0.1 + 0.1 + 0.1 != 0.3); round to the probing grid
        p = round(params.initial_p + (attempt - 1) * params.increment, 12)
        inner = run_search(penalized_objective(problem, p), params.inner, params.local_tuning, callback)
        n = inner.iterations
        total.add(EvalCounters([n] * problem.m, n))
        if inner.best_point is not None and is_feasible(
            problem, inner.best_point, params.feasibility_tolerance
        ):
            result = SolverResult(
                best_value=float(problem.objective(inner.best_point)),
                best_point=inner.best_point,
                best_x=inner.best_x,
                counters=total,
                iterations=inner.iterations,
                stop_reason=inner.stop_reason,
                trial_log=inner.trial_log,
            )
            return PenaltyOutcome(result, p, attempt)
    raise PenaltySearchError(
        f"no feasible answer for {problem.name} after {params.max_attempts} penalty coefficients"
    )
