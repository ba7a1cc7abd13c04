"""Constrained problems with ordered, partially defined constraints.

Every function of a problem accepts ``y`` either as a single point of shape
``(N,)`` or as a batch of shape ``(N, n)`` and must return a scalar or an
``(n,)`` array accordingly.  Constraint ``G_i`` is only ever called where
``G_1, ..., G_{i-1}`` are all ``<= 0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .curve import Box


class EvaluationError(RuntimeError):
    """A problem function returned a non-finite value."""

    def __init__(self, index, y, value):
        self.index = index
        self.y = np.asarray(y)
        self.value = value
        super().__init__(f"function {index} returned {value!r} at y = {self.y.tolist()}")


@dataclass(frozen=True)
class ConstrainedProblem:
    """Minimize ``objective`` over ``domain`` subject to ``constraints[i](y) <= 0``.

    ``known_solution`` and ``known_lipschitz`` are reference metadata only; no
    solver reads them.
    """

    name: str
    domain: Box
    constraints: tuple
    objective: Callable
    known_solution: Optional[tuple] = None
    known_lipschitz: Optional[tuple] = None
    functions_defined_everywhere: bool = True

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def m(self):
        return len(self.constraints)

    @property
    def dim(self):
        return self.domain.dim

    def function(self, index):
        """``G_index`` with 1-based numbering; ``index == m + 1`` is the objective."""
        if index == self.m + 1:
            return self.objective
        return self.constraints[index - 1]


@dataclass(frozen=True)
class IndexedValue:
    """Index ``nu`` of the first violated constraint (``m + 1`` if feasible) and ``g_nu``."""

    index: int
    value: float


@dataclass
class EvalCounters:
    """How many times each constraint and the objective were evaluated."""

    n_constraint: list = field(default_factory=list)
    n_objective: int = 0

    @classmethod
    def for_problem(cls, problem):
        return cls([0] * problem.m, 0)

    @property
    def total(self):
        return sum(self.n_constraint) + self.n_objective

    def count(self, index):
        """Counter of ``G_index`` (1-based, ``m + 1`` = objective)."""
        if index == len(self.n_constraint) + 1:
            return self.n_objective
        return self.n_constraint[index - 1]

    def add(self, other):
        self.n_constraint = [a + b for a, b in zip(self.n_constraint, other.n_constraint)]
        self.n_objective += other.n_objective

    def copy(self):
        return EvalCounters(list(self.n_constraint), self.n_objective)


def evaluate_indexed(problem, y, counters=None):
    """Run the index scheme at ``y``.

    Constraints are evaluated in order until the first one that is strictly
    positive; ``G_i(y) = 0`` counts as satisfied.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (problem.dim,):
        raise ValueError(f"y has shape {y.shape}, problem has dimension {problem.dim}")
    if not problem.domain.contains(y):
        raise ValueError(f"y = {y.tolist()} lies outside the search domain")
    for i, g in enumerate(problem.constraints, start=1):
        value = float(g(y))
        if counters is not None:
            counters.n_constraint[i - 1] += 1
        if not np.isfinite(value):
            raise EvaluationError(i, y, value)
        if value > 0.0:
            return IndexedValue(i, value)
    value = float(problem.objective(y))
    if counters is not None:
        counters.n_objective += 1
    if not np.isfinite(value):
        raise EvaluationError(problem.m + 1, y, value)
    return IndexedValue(problem.m + 1, value)


def grid_points(domain, points_per_axis):
    """Uniform tensor grid over ``domain`` as an ``(N, points_per_axis**N)`` array."""
    axes = [np.linspace(a, b, points_per_axis) for a, b in zip(domain.lower, domain.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh])


def grid_reference_solution(problem, points_per_axis):
    """Brute-force the index scheme on a uniform grid.

    Returns ``(y, value)`` for the best feasible grid node, or ``None`` when
    no node is feasible.  Constraints are only evaluated at nodes where the
    preceding ones hold.
    """
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be at least 2")
    Y = grid_points(problem.domain, points_per_axis)
    alive = np.arange(Y.shape[1])
    for g in problem.constraints:
        if alive.size == 0:
            return None
        values = np.broadcast_to(np.asarray(g(Y[:, alive]), dtype=float), alive.shape)
        alive = alive[values <= 0.0]
    if alive.size == 0:
        return None
    values = np.broadcast_to(np.asarray(problem.objective(Y[:, alive]), dtype=float), alive.shape)
    best = int(np.argmin(values))
    return Y[:, alive[best]].copy(), float(values[best])


# --------------------------------------------------------------------------
# Test problems


def _p12_objective(y):
    y1, y2 = y[0], y[1]
    return -1.5 * y1**2 * np.exp(1.0 - y1**2 - 20.25 * (y1 - y2) ** 2) - (
        0.5 * (y1 - 1.0) * (y2 - 1.0)
    ) ** 4 * np.exp(2.0 - (0.5 * (y1 - 1.0)) ** 4 - (y2 - 1.0) ** 4)


_P12_DOMAIN = Box((0.0, -1.0), (4.0, 3.0))


def _problem1():
    constraints = (
        lambda y: 0.01 * ((y[0] - 2.2) ** 2 + (y[1] - 1.2) ** 2 - 2.25),
        lambda y: 100.0 * (1.0 - (y[0] - 2.0) ** 2 / 1.44 - (0.5 * y[1]) ** 2),
        lambda y: 10.0 * (y[1] - 1.5 - 1.5 * np.sin(6.283 * (y[0] - 1.75))),
    )
    return ConstrainedProblem(
        "P1", _P12_DOMAIN, constraints, _p12_objective, known_solution=((0.942, 0.944), -1.489)
    )


def annulus_problem(center=(2.2, 1.2), name="P2", known_solution=None):
    """Problem-2 objective restricted to the annulus ``1.21 <= |y - center|^2 <= 1.25``."""
    cx, cy = float(center[0]), float(center[1])

    def outside_inner(y):
        return 1.21 - (y[0] - cx) ** 2 - (y[1] - cy) ** 2

    def inside_outer(y):
        return (y[0] - cx) ** 2 + (y[1] - cy) ** 2 - 1.25

    return ConstrainedProblem(
        name, _P12_DOMAIN, (outside_inner, inside_outer), _p12_objective, known_solution=known_solution
    )


def _problem2():
    return annulus_problem(known_solution=((1.088, 1.088), -1.477))


# B_17 (index 16) is 7e-10; it multiplies y1**3 * y2**3.
_P3_B = (
    75.1963666677, -3.8112755343, 0.1269366345, -0.0020567665, 0.0000103450,
    -6.8306567613, 0.0302344793, -0.0012813448, 0.0000352559, -0.0000002266,
    0.2564581253, -0.0034604030, 0.0000135139, -28.1064434908, -0.0000052375,
    -0.0000000063, 0.0000000007, 0.0003405462, -0.0000016638, -2.8673112392,
)


def _p3_objective(y):
    B = _P3_B
    y1, y2 = y[0], y[1]
    return -(
        B[0] + B[1] * y1 + B[2] * y1**2 + B[3] * y1**3 + B[4] * y1**4
        + B[5] * y2 + B[6] * y1 * y2 + B[7] * y1**2 * y2 + B[8] * y1**3 * y2
        + B[9] * y1**4 * y2 + B[10] * y2**2 + B[11] * y2**3 + B[12] * y2**4
        + B[13] / (1.0 + y2) + B[14] * y1**2 * y2**2 + B[15] * y1**3 * y2**2
        + B[16] * y1**3 * y2**3 + B[17] * y1 * y2**2 + B[18] * y1 * y2**3
        + B[19] * np.exp(0.0005 * y1 * y2)
    )


def _problem3():
    constraints = (
        lambda y: 450.0 - y[0] * y[1],
        lambda y: (0.1 * y[0] - 1.0) ** 2 - y[1],
        lambda y: 8.0 * (y[0] - 40.0) - (y[1] - 30.0) * (y[1] - 55.0),
        lambda y: (y[0] - 35.0) * (y[0] - 30.0) / 125.0 + y[1] - 80.0,
    )
    return ConstrainedProblem(
        "P3", Box((0.0, 0.0), (80.0, 80.0)), constraints, _p3_objective,
        known_solution=((77.19, 64.06), -59.59),
    )


def _problem4():
    def objective(y):
        y1, y2 = y[0], y[1]
        return -np.abs(np.sin(y1) * np.sin(2.0 * y2)) + 0.01 * (
            y1 * y2 + (y1 - np.pi) ** 2 + 3.0 * (y2 - np.pi) ** 2
        )

    constraints = (
        lambda y: 1.0 - y[1] + np.pi / 2 - np.abs(np.sin(2.0 * y[0])) + y[0] / 3.0,
        lambda y: y[1] - 1.5 * np.pi + 4.0 * np.abs(np.sin(y[0] + np.pi)) + y[0] / 3.0 - 1.9,
    )
    return ConstrainedProblem(
        "P4", Box((0.0, 0.0), (2 * np.pi, 2 * np.pi)), constraints, objective,
        known_solution=((1.247, 2.392), -0.864),
    )


def _problem5(N):
    def tail_sq(y):
        return sum(y[i] ** 2 for i in range(1, N))

    def objective(y):
        rho = np.sqrt(sum(y[i] ** 2 for i in range(N)))
        return y[0] + np.exp(rho - np.abs(rho**2 - 5.0 * rho + 4.0))

    constraints = (
        lambda y: (y[0] - 2.5) ** 2 - 6.25 + tail_sq(y),
        lambda y: -((y[0] - 2.0) ** 2) + 2.25 - tail_sq(y),
        lambda y: y[1] - 1.5 * np.pi + 4.0 * np.abs(np.sin(y[0] + np.pi)) + y[0] / 3.0 + 0.8,
    )
    domain = Box((-2.0,) + (-6.0,) * (N - 1), (8.0,) + (4.0,) * (N - 1))
    return ConstrainedProblem(
        f"P5-{N}", domain, constraints, objective, known_solution=((0.0,) * N, float(np.exp(-4.0)))
    )


PROBLEM_NAMES = ("P1", "P2", "P3", "P4", "P5")


def get_problem(name, N=None):
    """Look up one of the bundled test problems by name.

    ``N`` selects the dimension of ``P5`` (2 to 6) and must be omitted, or
    equal to 2, for the two-dimensional problems.
    """
    key = str(name).upper()
    if key == "P5":
        if N is None:
            raise ValueError("P5 needs a dimension N in [2, 6]")
        if not 2 <= int(N) <= 6:
            raise ValueError(f"P5 dimension must be in [2, 6], got {N}")
        return _problem5(int(N))
    builders = {"P1": _problem1, "P2": _problem2, "P3": _problem3, "P4": _problem4}
    if key not in builders:
        raise KeyError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    if N is not None and int(N) != 2:
        raise ValueError(f"{key} is two-dimensional, got N = {N}")
    return builders[key]()


def perturbed_annulus(seed, count=20):
    """``count`` copies of Problem 2 with the annulus center shifted by U(-1, 1)^2 offsets."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-1.0, 1.0, size=(count, 2))
    return [
        annulus_problem((2.2 + dx, 1.2 + dy), name=f"P2-shift{i + 1:02d}")
        for i, (dx, dy) in enumerate(offsets)
    ]


def unconstrained(name, domain, objective, known_solution=None):
    """Convenience constructor for an ``m = 0`` problem."""
    return ConstrainedProblem(name, domain, (), objective, known_solution=known_solution)
