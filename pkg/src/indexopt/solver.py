"""Index information algorithm with local tuning on the curve-reduced problem.

The search runs on [0, 1]. Every trial maps ``x`` through the Hilbert curve
onto the problem's box and evaluates the index scheme there. Trials are
kept sorted by ``x`` in parallel numpy arrays. Per-interval quantities
that do not depend on the record value are cached and refreshed only next
to each new trial. :func:`step` is the plain numpy form of one iteration;
:func:`run_search` drives the same arithmetic through compiled loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .curve import CurveMap, map_to_cube, map_to_polyline, resolution, scale_to_domain
from .problem import EvalCounters, evaluate_indexed


class ResolutionStop(Exception):
    """The next trial would be closer than the curve resolution to an old one."""


@dataclass(frozen=True)
class SolverParams:
    """Method parameters.

    r : reliability (> 1); larger values search more globally.
    xi : floor for the local Hölder estimates.
    delta : stop once the selected interval is this short in the Hölder metric.
    d : level of the curve approximation.
    max_iterations : cap on the total number of trials.
    curve : ``"polyline"`` (continuous, default) or ``"cells"`` (piecewise
        constant; the run stops once two trials would be closer than
        ``2**-(d*N)``).
    """

    r: float = 2.2
    xi: float = 1e-8
    delta: float = 1e-3
    d: int = 10
    max_iterations: int = 5000
    curve: str = "polyline"

    def __post_init__(self):
        if not self.r > 1.0:
            raise ValueError(f"r must be > 1, got {self.r}")
        if not self.xi > 0.0:
            raise ValueError(f"xi must be > 0, got {self.xi}")
        if not self.delta > 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.max_iterations < 2:
            raise ValueError("max_iterations must allow the two initial trials")
        if self.curve not in ("polyline", "cells"):
            raise ValueError(f"curve must be 'polyline' or 'cells', got {self.curve!r}")

    def min_separation(self, curve):
        return resolution(curve) if self.curve == "cells" else 0.0

    def curve_for(self, N):
        return CurveMap(N, self.d)


@dataclass(frozen=True)
class TrialPoint:
    x: float
    nu: int
    g: float
    z: float


@dataclass
class IntervalEstimates:
    """Columnar per-interval data; entry ``i - 1`` belongs to ``[x_{i-1}, x_i]``."""

    delta: np.ndarray
    l: np.ndarray
    c: np.ndarray
    r: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    M: np.ndarray
    R: np.ndarray = None

    def __len__(self):
        return len(self.delta)


@dataclass(frozen=True)
class SolverResult:
    best_value: Optional[float]
    best_point: Optional[np.ndarray]
    best_x: Optional[float]
    counters: EvalCounters
    iterations: int
    stop_reason: str
    trial_log: list = field(repr=False)

    @property
    def feasible(self):
        return self.best_value is not None


class _Columns:
    """Parallel growable arrays supporting in-place insertion."""

    def __init__(self, **dtypes):
        self._n = 0
        self._buf = {name: np.empty(16, dtype=dt) for name, dt in dtypes.items()}

    def __len__(self):
        return self._n

    def __getitem__(self, name):
        return self._buf[name][: self._n]

    def insert(self, pos, **values):
        n = self._n
        for name, buf in self._buf.items():
            if n == len(buf):
                buf = self._buf[name] = np.concatenate([buf, np.empty_like(buf)])
            buf[pos + 1 : n + 1] = buf[pos:n]  # numpy handles the overlap
            buf[pos] = values[name]
        self._n = n + 1


class SearchState:
    """Sorted trials plus the running estimates ``mu``, ``z*`` and counters.

    Per-interval lengths, difference quotients and ``lambda_i`` are cached and
    refreshed only around each new trial. None of them depends on ``z*``,
    since the shift cancels in same-index differences.
    """

    def __init__(self, problem, curve, mapping=map_to_polyline):
        self.problem = problem
        self.curve = curve
        self.mapping = mapping
        self.N = curve.dimension
        self.m = problem.m
        self._nodes = _Columns(x=float, nu=int, g=float)
        self._ints = _Columns(delta=float, l=float, c=float, r=float, lam=float, jmax=int)
        self.mu = np.zeros(self.m + 1)
        self.xmax = np.zeros(self.m + 1)
        self.z_star = None
        self.best_x = None
        self.best_y = None
        self.counters = EvalCounters.for_problem(problem)
        self.trial_log = []

    x = property(lambda self: self._nodes["x"])
    nu = property(lambda self: self._nodes["nu"])
    g = property(lambda self: self._nodes["g"])

    def interval(self, name):
        """Cached per-interval column: delta, l, c, r, lam or jmax."""
        return self._ints[name]

    @property
    def k(self):
        """Iteration number: one less than the number of trials."""
        return len(self._nodes) - 1

    def z(self):
        """Trial values with objective values shifted by the current record."""
        z = self.g.copy()
        if self.z_star is not None:
            z[self.nu == self.m + 1] -= self.z_star
        return z

    def trials(self):
        return [TrialPoint(float(a), int(b), float(c), float(d))
                for a, b, c, d in zip(self.x, self.nu, self.g, self.z())]

    def point(self, x):
        return scale_to_domain(self.mapping(self.curve, x), self.problem.domain)

    def add_trial(self, x):
        """Evaluate the index scheme at ``x`` and insert the trial in order."""
        pos = int(np.searchsorted(self.x, x))
        if pos < len(self._nodes) and self.x[pos] == x:
            raise ResolutionStop(f"repeated trial at x = {x!r}")
        y = self.point(x)
        iv = evaluate_indexed(self.problem, y, self.counters)
        self.trial_log.append((float(x), y, iv.index, iv.value))
        j = iv.index
        self.mu[j - 1] = _kernels.max_quotient(
            self.x, self.nu, self.g, j, float(x), iv.value, self.N, self.mu[j - 1]
        )
        self._nodes.insert(pos, x=x, nu=j, g=iv.value)
        if len(self._nodes) > 1:
            self._split_interval(pos)
        if j == self.m + 1 and (self.z_star is None or iv.value < self.z_star):
            self.z_star = iv.value
            self.best_x = float(x)
            self.best_y = y
        return iv

    def _split_interval(self, pos):
        ints = self._ints
        n_nodes = len(self._nodes)
        if n_nodes == 2:
            ints.insert(0, delta=0.0, l=0.0, c=0.0, r=0.0, lam=0.0, jmax=0)
            lo, hi = 0, 0
        elif pos == 0 or pos == n_nodes - 1:
            raise ValueError("trials outside [x_0, x_k] are never added after initialization")
        else:
            p = pos - 1
            old_delta, old_j = ints["delta"][p], ints["jmax"][p]
            ints.insert(p, delta=0.0, l=0.0, c=0.0, r=0.0, lam=0.0, jmax=0)
            lo, hi = max(p - 1, 0), min(p + 2, len(ints) - 1)
            if old_delta >= self.xmax[old_j - 1]:
                self._pending_xmax = old_j
        a = max(lo - 1, 0)
        b = min(hi + 3, n_nodes)
        delta, l, c, r = local_quotients(self.x[a:b], self.nu[a:b], self.g[a:b], self.N)
        sl = slice(lo - a, hi - a + 1)
        nu = self.nu
        for name, vals in (("delta", delta), ("l", l), ("c", c), ("r", r)):
            ints[name][lo : hi + 1] = vals[sl]
        ints["lam"][lo : hi + 1] = np.maximum(np.maximum(l[sl], c[sl]), r[sl])
        ints["jmax"][lo : hi + 1] = np.maximum(nu[lo : hi + 1], nu[lo + 1 : hi + 2])
        stale = getattr(self, "_pending_xmax", None)
        if stale is not None:
            sel = ints["jmax"] == stale
            self.xmax[stale - 1] = ints["delta"][sel].max() if sel.any() else 0.0
            self._pending_xmax = None
        for i in range(lo, hi + 1):
            jj = ints["jmax"][i] - 1
            self.xmax[jj] = max(self.xmax[jj], ints["delta"][i])


def initialize(problem, params, curve=None):
    """Trials at both ends of [0, 1]."""
    curve = curve or params.curve_for(problem.dim)
    mapping = map_to_cube if params.curve == "cells" else map_to_polyline
    state = SearchState(problem, curve, mapping)
    state.add_trial(0.0)
    state.add_trial(1.0)
    return state


def compute_mu(state):
    """Global lower bounds ``mu_j`` recomputed from every pair of same-index trials."""
    mu = np.zeros(state.m + 1)
    for j in range(1, state.m + 2):
        sel = state.nu == j
        if sel.sum() < 2:
            continue
        xs, gs = state.x[sel], state.g[sel]
        dx = np.abs(xs[:, None] - xs[None, :]) ** (1.0 / state.N)
        dg = np.abs(gs[:, None] - gs[None, :])
        iu = np.triu_indices(len(xs), 1)
        mu[j - 1] = float((dg[iu] / dx[iu]).max())
    return mu


def local_quotients(x, nu, g, N):
    """``(delta, l, c, r)``: interval lengths in the Hölder metric and the
    neighbour difference quotients that feed ``lambda``.

    Raw values ``g`` give the same differences as the shifted ``z``.
    """
    delta = np.diff(x) ** (1.0 / N)
    same = nu[1:] == nu[:-1]
    q = np.where(same, np.abs(np.diff(g)) / delta, 0.0)
    c = q
    l = np.zeros_like(q)
    l[1:] = np.where(same[:-1] & (nu[1:-1] >= nu[2:]), q[:-1], 0.0)
    r = np.zeros_like(q)
    r[:-1] = np.where(same[1:] & (nu[1:-1] >= nu[:-2]), q[1:], 0.0)
    return delta, l, c, r


def x_max(delta, jmax, m):
    """Longest interval (Hölder metric) for each larger-end index."""
    xmax = np.zeros(m + 1)
    np.maximum.at(xmax, jmax - 1, delta)
    return xmax


def global_term(delta, jmax, mu, xmax):
    """``gamma_i = mu_j * delta_i / X^max_j`` with ``j`` the larger end index."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(xmax > 0.0, mu / xmax, 0.0)
    return ratio[jmax - 1] * delta


def local_term(state):
    """Cached ``lambda_i = max(l_i, c_i, r_i)``."""
    return state.interval("lam")


def compute_interval_estimates(state, params, local_tuning=True):
    """Hölder-constant estimates ``M_i`` for every interval, from the cache.

    With ``local_tuning=False`` every interval gets the global bound of its
    larger end index, ``M_i = max(mu_j, xi)``.
    """
    delta = state.interval("delta")
    jmax = state.interval("jmax")
    if local_tuning:
        lam = local_term(state)
        gamma = global_term(delta, jmax, state.mu, state.xmax)
    else:
        lam = gamma = state.mu[jmax - 1]
    M = np.maximum(np.maximum(lam, gamma), params.xi)
    return IntervalEstimates(
        delta, state.interval("l"), state.interval("c"), state.interval("r"), lam, gamma, M
    )


def estimates_from_scratch(state, params, local_tuning=True):
    """Same as :func:`compute_interval_estimates` but ignoring every cache."""
    x, nu = state.x, state.nu
    delta, l, c, r = local_quotients(x, nu, state.g, state.N)
    jmax = np.maximum(nu[1:], nu[:-1])
    mu = compute_mu(state)
    if local_tuning:
        lam = np.maximum(np.maximum(l, c), r)
        gamma = global_term(delta, jmax, mu, x_max(delta, jmax, state.m))
    else:
        lam = gamma = mu[jmax - 1]
    M = np.maximum(np.maximum(lam, gamma), params.xi)
    return IntervalEstimates(delta, l, c, r, lam, gamma, M)


def characteristics(est, nu, z, r):
    """Vectorized interval characteristics ``R_i``."""
    rM = r * est.M
    zl, zr = z[:-1], z[1:]
    nl, nr = nu[:-1], nu[1:]
    d = est.delta
    equal = d + (zr - zl) ** 2 / (rM**2 * d) - 2.0 * (zr + zl) / rM
    right_up = 2.0 * d - 4.0 * zr / rM
    left_up = 2.0 * d - 4.0 * zl / rM
    return np.where(nr == nl, equal, np.where(nr > nl, right_up, left_up))


def characteristic(delta, M, left, right, r):
    """Characteristic of a single interval between trials ``left`` and ``right``."""
    rM = r * M
    if left.nu == right.nu:
        return delta + (right.z - left.z) ** 2 / (rM**2 * delta) - 2.0 * (right.z + left.z) / rM
    if right.nu > left.nu:
        return 2.0 * delta - 4.0 * right.z / rM
    return 2.0 * delta - 4.0 * left.z / rM


def select_interval(R):
    """1-based number of the first interval with the largest characteristic."""
    R = np.asarray(R, dtype=float)
    if R.size == 0:
        raise ValueError("no intervals to choose from")
    return int(np.argmax(R)) + 1


def next_point(x_left, x_right, nu_left, nu_right, z_left, z_right, M, N, r, res=0.0):
    """New trial inside the interval ``[x_left, x_right]``.

    Raises :class:`ResolutionStop` if the point falls within ``res`` of
    either end.
    """
    mid = 0.5 * (x_left + x_right)
    if nu_left == nu_right:
        dz = z_right - z_left
        x = mid - math.copysign(1.0, dz) * abs(dz) ** N / (2.0 * r * M**N) if dz != 0.0 else mid
    else:
        x = mid
    if not (x - x_left >= res and x_right - x >= res and x_left < x < x_right):
        raise ResolutionStop(f"trial {x!r} too close to [{x_left!r}, {x_right!r}]")
    return x


@dataclass(frozen=True)
class Subdivision:
    """One executed iteration: the chosen interval and where it was split."""

    t: int
    x_left: float
    x_right: float
    x_new: float
    M: float


def step(state, params, local_tuning=True, from_scratch=False):
    """One iteration of the method: select an interval, test it, place a trial.

    Returns the :class:`Subdivision` performed, or ``None`` when the stopping
    rule fires on the selected interval.  ``from_scratch=True`` bypasses all
    cached estimates.
    """
    estimate = estimates_from_scratch if from_scratch else compute_interval_estimates
    est = estimate(state, params, local_tuning)
    z = state.z()
    est.R = characteristics(est, state.nu, z, params.r)
    t = select_interval(est.R)
    if est.delta[t - 1] <= params.delta:
        return None
    x_new = next_point(
        state.x[t - 1], state.x[t], state.nu[t - 1], state.nu[t], z[t - 1], z[t],
        est.M[t - 1], state.N, params.r, params.min_separation(state.curve),
    )
    sub = Subdivision(t, float(state.x[t - 1]), float(state.x[t]), float(x_new), float(est.M[t - 1]))
    state.add_trial(x_new)
    return sub


def _fast_step(state, params, local_tuning):
    # Same decisions as step(), without materializing R, M or z.
    m = state.m
    has_star = state.z_star is not None
    z_star = state.z_star if has_star else 0.0
    g, nu = state.g, state.nu
    t0, M = _kernels.select(
        g, nu, state.interval("delta"), state.interval("lam"), state.interval("jmax"),
        state.mu, state.xmax, z_star, has_star, m, params.r, params.xi, local_tuning,
    )
    if state.interval("delta")[t0] <= params.delta:
        return None
    zl, zr = g[t0], g[t0 + 1]
    if has_star:
        zl -= z_star if nu[t0] == m + 1 else 0.0
        zr -= z_star if nu[t0 + 1] == m + 1 else 0.0
    x_left, x_right = float(state.x[t0]), float(state.x[t0 + 1])
    x_new = next_point(
        x_left, x_right, nu[t0], nu[t0 + 1], zl, zr, M, state.N, params.r,
        params.min_separation(state.curve),
    )
    state.add_trial(x_new)
    return Subdivision(t0 + 1, x_left, x_right, float(x_new), float(M))


def _result(state, reason):
    return SolverResult(
        best_value=state.z_star,
        best_point=None if state.best_y is None else np.array(state.best_y),
        best_x=state.best_x,
        counters=state.counters.copy(),
        iterations=len(state.trial_log),
        stop_reason=reason,
        trial_log=list(state.trial_log),
    )


def run_search(problem, params, local_tuning=True, callback: Optional[Callable] = None):
    """Shared driver for the local-tuning method and its global-estimate variant.

    ``callback(state, subdivision)`` is called after every iteration.
    """
    state = initialize(problem, params)
    while True:
        if len(state.x) >= params.max_iterations:
            return _result(state, "max_iterations")
        try:
            sub = _fast_step(state, params, local_tuning)
        except ResolutionStop:
            return _result(state, "resolution")
        if sub is None:
            return _result(state, "tolerance")
        if callback is not None:
            callback(state, sub)


def solve(problem, params=None, callback=None):
    """Minimize ``problem`` with the index method with local tuning."""
    return run_search(problem, params or SolverParams(), True, callback)


def compute_r_star(lipschitz, N, xi):
    """Reliability value above which convergence to a global minimizer is guaranteed.

    ``2**(3 - 1/N) * sqrt(N + 3) * max(L) / xi``; far larger than what is
    needed in practice.
    """
    L = np.asarray(lipschitz, dtype=float)
    if L.size == 0 or np.any(L <= 0.0):
        raise ValueError("Lipschitz constants must be positive")
    if not xi > 0.0:
        raise ValueError("xi must be positive")
    if N < 2:
        raise ValueError("N must be >= 2")
    return 2.0 ** (3.0 - 1.0 / N) * math.sqrt(N + 3) * float(L.max()) / xi
