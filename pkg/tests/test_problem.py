import numpy as np
import pytest

from indexopt.curve import Box
from indexopt.problem import (
    PROBLEM_NAMES,
    ConstrainedProblem,
    EvalCounters,
    EvaluationError,
    annulus_problem,
    evaluate_indexed,
    get_problem,
    grid_points,
    grid_reference_solution,
    perturbed_annulus,
    unconstrained,
)

ALL = [get_problem(n) for n in ("P1", "P2", "P3", "P4")] + [get_problem("P5", N) for N in range(2, 7)]


def test_p1_at_reported_minimizer():
    p = get_problem("P1")
    iv = evaluate_indexed(p, [0.942, 0.944])
    assert iv.index == 4
    assert iv.value == pytest.approx(-1.489, abs=5e-3)


def test_p1_first_constraint_violated_at_corner():
    p = get_problem("P1")
    c = EvalCounters.for_problem(p)
    iv = evaluate_indexed(p, [0.0, -1.0], c)
    assert iv.index == 1
    assert iv.value == pytest.approx(0.01 * (2.2**2 + 2.2**2 - 2.25))
    assert c.n_constraint == [1, 0, 0] and c.n_objective == 0


def test_unconstrained_index():
    p = unconstrained("bowl", Box((-1, -1), (1, 1)), lambda y: y[0] ** 2 + y[1] ** 2)
    iv = evaluate_indexed(p, [0.5, 0.0])
    assert (iv.index, iv.value) == (1, 0.25)


def test_zero_constraint_counts_as_satisfied():
    p = ConstrainedProblem("edge", Box((0,), (1,)), (lambda y: 0.0 * y[0],), lambda y: 3.0)
    assert evaluate_indexed(p, [0.5]).index == 2


def test_outside_domain_rejected():
    with pytest.raises(ValueError):
        evaluate_indexed(get_problem("P1"), [5.0, 0.0])
    with pytest.raises(ValueError):
        evaluate_indexed(get_problem("P1"), [1.0, 0.0, 0.0])


def test_non_finite_value_reports_index():
    p = ConstrainedProblem(
        "bad", Box((0,), (1,)), (lambda y: -1.0, lambda y: np.nan), lambda y: 0.0
    )
    with pytest.raises(EvaluationError) as info:
        evaluate_indexed(p, [0.5])
    assert info.value.index == 2


@pytest.mark.parametrize("p", ALL, ids=lambda p: p.name)
def test_known_solutions_are_feasible(p):
    y, phi = p.known_solution
    iv = evaluate_indexed(p, y)
    assert iv.index == p.m + 1
    assert iv.value == pytest.approx(phi, abs=5e-3)


def test_registry_metadata():
    p2 = get_problem("P2")
    assert p2.domain == Box((0, -1), (4, 3)) and p2.m == 2
    assert p2.known_solution == ((1.088, 1.088), -1.477)
    p3 = get_problem("p3")
    assert p3.domain == Box((0, 0), (80, 80)) and p3.m == 4
    assert p3.known_solution[0] == (77.19, 64.06)
    p5 = get_problem("P5", 2)
    assert p5.m == 3
    assert p5.known_solution[1] == pytest.approx(0.0183, abs=1e-4)
    assert set(PROBLEM_NAMES) == {"P1", "P2", "P3", "P4", "P5"}


@pytest.mark.parametrize("name,N", [("P6", None), ("P5", None), ("P5", 1), ("P5", 7), ("P1", 3)])
def test_registry_errors(name, N):
    with pytest.raises((KeyError, ValueError)):
        get_problem(name, N)


def test_p3_small_coefficient():
    # B17 multiplies y1^3 y2^3; at (80, 80) it contributes about 0.18
    p = get_problem("P3")
    from indexopt import problem as mod
    assert mod._P3_B[16] == 7e-10
    assert np.isfinite(p.objective(np.array([80.0, 80.0])))


def test_counter_monotonicity_on_random_points():
    rng = np.random.default_rng(3)
    for p in ALL:
        c = EvalCounters.for_problem(p)
        lo, hi = np.array(p.domain.lower), np.array(p.domain.upper)
        for y in lo + (hi - lo) * rng.random((300, p.dim)):
            evaluate_indexed(p, y, c)
        chain = c.n_constraint + [c.n_objective]
        assert all(a >= b for a, b in zip(chain, chain[1:]))
        assert c.total == sum(chain)


def test_spy_partial_definition(spy):
    rng = np.random.default_rng(4)
    for base in ALL[:4]:
        s = spy(base)
        c = EvalCounters.for_problem(base)
        lo, hi = np.array(base.domain.lower), np.array(base.domain.upper)
        for y in lo + (hi - lo) * rng.random((200, base.dim)):
            evaluate_indexed(s.problem, y, c)
        s.assert_partial_definition()
        assert [s.count(i) for i in range(1, base.m + 1)] == c.n_constraint
        assert s.count(base.m + 1) == c.n_objective


def test_grid_points_shape():
    Y = grid_points(Box((0, 0, 0), (1, 2, 3)), 4)
    assert Y.shape == (3, 64)
    assert Y[:, -1].tolist() == [1.0, 2.0, 3.0]


@pytest.mark.parametrize("name,expected", [("P4", -0.864), ("P2", -1.477)])
def test_grid_oracle(name, expected):
    y, value = grid_reference_solution(get_problem(name), 1000)
    assert value == pytest.approx(expected, abs=0.01)


def test_grid_oracle_infeasible():
    p = ConstrainedProblem("empty", Box((0, 0), (1, 1)), (lambda y: 1.0 + 0.0 * y[0],), lambda y: y[0])
    assert grid_reference_solution(p, 10) is None


def test_grid_oracle_matches_scalar_index_scheme():
    p = get_problem("P1")
    y, value = grid_reference_solution(p, 101)
    iv = evaluate_indexed(p, y)
    assert iv.index == p.m + 1 and iv.value == value


def test_perturbed_annulus_deterministic():
    a, b = perturbed_annulus(7), perturbed_annulus(7)
    assert len(a) == 20 and [p.name for p in a] == [p.name for p in b]
    Y = grid_points(a[0].domain, 50)
    for p, q in zip(a, b):
        for g, h in zip(p.constraints, q.constraints):
            assert np.array_equal(g(Y), h(Y))
    assert not np.array_equal(a[0].constraints[0](Y), perturbed_annulus(8)[0].constraints[0](Y))


def test_perturbed_annulus_finite_on_grid():
    Y = grid_points(get_problem("P2").domain, 100)
    for p in perturbed_annulus(0):
        for g in p.constraints:
            assert np.all(np.isfinite(g(Y)))


def test_zero_offset_is_problem_two():
    Y = grid_points(get_problem("P2").domain, 40)
    p2, q = get_problem("P2"), annulus_problem((2.2, 1.2))
    for g, h in zip(p2.constraints, q.constraints):
        assert np.array_equal(g(Y), h(Y))


def test_perturbed_annulus_count():
    with pytest.raises(ValueError):
        perturbed_annulus(0, 0)
    assert len(perturbed_annulus(0, 1)) == 1
