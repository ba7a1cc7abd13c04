"""Constrained global optimization with the index scheme, local tuning of
Hölder constants and a space-filling-curve reduction to one dimension."""

from .baselines import PenaltyParams, solve_penalty, solve_strongin_markin
from .curve import Box, CurveError, CurveMap, holder_distance, map_to_cube, map_to_polyline
from .harness import RunRecord, SpeedupReport, dump_trials, experiment2, run, speedup
from .problem import (
    ConstrainedProblem,
    EvalCounters,
    EvaluationError,
    evaluate_indexed,
    get_problem,
    grid_reference_solution,
)
from .solver import SearchState, SolverParams, SolverResult, solve

__all__ = [
    "Box", "ConstrainedProblem", "CurveError", "CurveMap", "EvalCounters", "EvaluationError",
    "PenaltyParams", "RunRecord", "SearchState", "SolverParams", "SolverResult", "SpeedupReport",
    "dump_trials", "evaluate_indexed", "experiment2", "get_problem", "grid_reference_solution",
    "holder_distance", "map_to_cube", "map_to_polyline", "run", "solve", "solve_penalty",
    "solve_strongin_markin", "speedup",
]
