import numpy as np
import pytest

from indexopt.problem import ConstrainedProblem


class Spy:
    """Wrap a problem's functions and log every call as ``(index, y)``."""

    def __init__(self, problem):
        self.calls = []
        self.base = problem

        def wrap(index, f):
            def g(y):
                self.calls.append((index, np.array(y, dtype=float)))
                return f(y)
            return g

        self.problem = ConstrainedProblem(
            problem.name,
            problem.domain,
            tuple(wrap(i, f) for i, f in enumerate(problem.constraints, start=1)),
            wrap(problem.m + 1, problem.objective),
            known_solution=problem.known_solution,
        )

    def count(self, index):
        return sum(1 for i, _ in self.calls if i == index)

    def assert_partial_definition(self):
        """No ``G_i`` was called where an earlier ``G_j`` is positive."""
        for index, y in self.calls:
            for j in range(1, index):
                assert self.base.function(j)(y) <= 0.0, (index, j, y)


@pytest.fixture
def spy():
    return Spy


_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def report(request):
    """Append one acceptance line; every line is echoed in the terminal summary."""
    lines = request.config.stash[_LINES_KEY]

    def emit(line):
        lines.append(line)
        print(line)

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
