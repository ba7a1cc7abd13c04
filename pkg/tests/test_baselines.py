import numpy as np
import pytest

from indexopt.baselines import (
    PenaltyParams,
    PenaltySearchError,
    is_feasible,
    penalized_objective,
    solve_penalty,
    solve_strongin_markin,
)
from indexopt.curve import Box
from indexopt.problem import ConstrainedProblem, evaluate_indexed, get_problem
from indexopt.solver import SolverParams, initialize, step


def test_penalized_objective_feasible_point():
    p = get_problem("P1")
    y = np.array([0.942, 0.944])
    assert penalized_objective(p, 5.0).objective(y) == pytest.approx(p.objective(y))
    assert penalized_objective(p, 5.0).m == 0


def test_penalized_objective_corner():
    p = get_problem("P1")
    y = np.array([0.0, -1.0])
    g = [float(f(y)) for f in p.constraints]
    assert g[0] == pytest.approx(0.0743)
    assert g[1] == pytest.approx(100 * (1 - 4 / 1.44 - 0.25))
    expected = p.objective(y) + max(g + [0.0])
    assert penalized_objective(p, 1.0).objective(y) == pytest.approx(expected)


def test_penalized_objective_small_p_limit():
    p = get_problem("P4")
    y = np.array([0.3, 5.0])
    assert penalized_objective(p, 1e-12).objective(y) == pytest.approx(p.objective(y), abs=1e-9)


def test_penalized_objective_batch():
    p = get_problem("P2")
    Y = np.array([[0.5, 1.0, 3.0], [0.0, 1.0, 2.5]])
    out = penalized_objective(p, 0.3).objective(Y)
    ref = [penalized_objective(p, 0.3).objective(Y[:, i]) for i in range(3)]
    assert np.allclose(out, ref)


def test_is_feasible():
    p = get_problem("P2")
    assert is_feasible(p, [1.088, 1.088])
    assert not is_feasible(p, [2.2, 1.2])


def test_strongin_markin_first_step_uses_floor():
    # left end feasible, right end violates the constraint: mu is still zero
    p = ConstrainedProblem("split", Box((-0.5,), (0.5,)), (lambda y: y[0],), lambda y: y[0] ** 2)
    prm = SolverParams()
    state = initialize(p, prm)
    assert state.nu.tolist() == [2, 1]
    sub = step(state, prm, local_tuning=False)
    assert sub.M == prm.xi and sub.x_new == 0.5


def test_strongin_markin_p1():
    res = solve_strongin_markin(get_problem("P1"), SolverParams(delta=1e-3))
    assert res.feasible
    assert res.best_value == pytest.approx(-1.489, abs=0.05)


def test_penalty_counters_are_uniform():
    out = solve_penalty(get_problem("P4"), PenaltyParams(inner=SolverParams(delta=1e-3)))
    c = out.result.counters
    assert len(set(c.n_constraint + [c.n_objective])) == 1
    assert out.attempts == round(out.p_star / 0.1)
    assert is_feasible(get_problem("P4"), out.result.best_point)
    iv = evaluate_indexed(get_problem("P4"), out.result.best_point)
    assert iv.value == out.result.best_value


def test_penalty_smallest_coefficient():
    p = get_problem("P2")
    inner = SolverParams(delta=1e-3)
    out = solve_penalty(p, PenaltyParams(inner=inner))
    assert out.p_star == pytest.approx(0.1 * out.attempts)
    # stopping one coefficient earlier leaves no feasible answer
    if out.attempts > 1:
        with pytest.raises(PenaltySearchError):
            solve_penalty(p, PenaltyParams(max_attempts=out.attempts - 1, inner=inner))


def test_penalty_empty_feasible_set():
    p = ConstrainedProblem("void", Box((0, 0), (1, 1)), (lambda y: 1.0 + y[0] ** 2,), lambda y: y[1])
    with pytest.raises(PenaltySearchError):
        solve_penalty(p, PenaltyParams(max_attempts=3, inner=SolverParams(max_iterations=200)))


def test_penalty_params_validation():
    for kw in (dict(initial_p=0.0), dict(increment=-0.1), dict(max_attempts=0)):
        with pytest.raises(ValueError):
            PenaltyParams(**kw)


def test_penalty_with_local_tuning_inner():
    out = solve_penalty(get_problem("P4"), PenaltyParams(inner=SolverParams(delta=1e-3), local_tuning=True))
    assert out.result.feasible
