"""Space-filling (Hilbert) curve reduction of the N-cube to [0, 1].

A level-``d`` approximation splits the cube ``D = [-1/2, 1/2]^N`` into
``2**(d*N)`` cells of edge ``2**-d`` and orders them along a Hilbert walk.
The interval [0, 1] is cut into the same number of equal pieces.
:func:`map_to_cube` sends every point of the k-th piece to the center of the
k-th cell; :func:`map_to_polyline` instead follows the broken line joining
consecutive centers, passing through center k at the midpoint of piece k.

Orientation: rank 0 is the cell touching the corner ``(-1/2, ..., -1/2)``.
All levels for a fixed ``N`` are coarsenings of one reference walk, so a
level-``d+1`` block of ``2**N`` consecutive ranks always fills exactly one
level-``d`` cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

#: Bits of a double mantissa; ``d * N`` may not exceed this.
MAX_BITS = 52


class CurveError(ValueError):
    """Invalid curve construction or argument outside the curve's domain."""


@njit(cache=True)
def _transpose_to_axes(X, bits):
    # In-place inverse of Skilling's (2004) Hilbert transform.
    n = len(X)
    top = 2 << (bits - 1)
    t = X[n - 1] >> 1
    for i in range(n - 1, 0, -1):
        X[i] ^= X[i - 1]
    X[0] ^= t
    q = 2
    while q != top:
        p = q - 1
        for i in range(n - 1, -1, -1):
            if X[i] & q:
                X[0] ^= p
            else:
                t = (X[0] ^ X[i]) & p
                X[0] ^= t
                X[i] ^= t
        q <<= 1
    return X


@njit(cache=True)
def _axes_to_transpose(X, bits):
    n = len(X)
    m = 1 << (bits - 1)
    q = m
    while q > 1:
        p = q - 1
        for i in range(n):
            if X[i] & q:
                X[0] ^= p
            else:
                t = (X[0] ^ X[i]) & p
                X[0] ^= t
                X[i] ^= t
        q >>= 1
    for i in range(1, n):
        X[i] ^= X[i - 1]
    t = 0
    q = m
    while q > 1:
        if X[n - 1] & q:
            t ^= q - 1
        q >>= 1
    for i in range(n):
        X[i] ^= t
    return X


@njit(cache=True)
def _index_to_transpose(h, n, bits):
    X = np.zeros(n, dtype=np.int64)
    pos = n * bits - 1
    for b in range(bits - 1, -1, -1):
        for i in range(n):
            if (h >> pos) & 1:
                X[i] |= 1 << b
            pos -= 1
    return X


@njit(cache=True)
def _transpose_to_index(X, bits):
    n = len(X)
    h = np.int64(0)
    for b in range(bits - 1, -1, -1):
        for i in range(n):
            h = (h << 1) | ((X[i] >> b) & 1)
    return h


@njit(cache=True)
def _ranks_to_cells(ranks, n, bits, shift):
    out = np.empty((ranks.shape[0], n), dtype=np.int64)
    for row in range(ranks.shape[0]):
        X = _index_to_transpose(ranks[row] << (n * shift), n, bits)
        _transpose_to_axes(X, bits)
        for i in range(n):
            out[row, i] = X[i] >> shift
    return out


@njit(cache=True)
def _cells_to_ranks(cells, bits, shift):
    n = cells.shape[1]
    out = np.empty(cells.shape[0], dtype=np.int64)
    for row in range(cells.shape[0]):
        X = cells[row].copy() << shift
        _axes_to_transpose(X, bits)
        out[row] = _transpose_to_index(X, bits) >> (n * shift)
    return out


@dataclass(frozen=True)
class Box:
    """Axis-aligned search box ``[lower, upper]``."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        if len(lower) != len(upper) or not lower:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if any(a >= b for a, b in zip(lower, upper)):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return len(self.lower)

    @classmethod
    def unit(cls, dim):
        """The canonical cube ``[-1/2, 1/2]^dim``."""
        return cls((-0.5,) * dim, (0.5,) * dim)

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        return bool(np.all(y >= self.lower) and np.all(y <= self.upper))


@dataclass(frozen=True)
class CurveMap:
    """Level-``level`` Hilbert approximation for ``dimension`` coordinates.

    For ``dimension == 1`` the map is the affine identity ``x -> x - 1/2``
    and ``level`` only enters :func:`resolution`.
    """

    dimension: int
    level: int
    _ref_bits: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dimension < 1:
            raise CurveError(f"dimension must be >= 1, got {self.dimension}")
        if self.level < 1:
            raise CurveError(f"level must be >= 1, got {self.level}")
        if self.dimension * self.level > MAX_BITS:
            raise CurveError(
                f"level*dimension = {self.dimension * self.level} exceeds {MAX_BITS}; "
                "points on [0, 1] would not be distinguishable in double precision"
            )
        object.__setattr__(self, "_ref_bits", max(MAX_BITS // self.dimension, 1))

    @property
    def n_cells(self):
        return 1 << (self.dimension * self.level)

    def rank_to_cell(self, k):
        """Integer cell coordinates (each in ``[0, 2**level)``) of rank ``k``."""
        if not 0 <= k < self.n_cells:
            raise CurveError(f"rank {k} outside [0, {self.n_cells})")
        n, bits = self.dimension, self._ref_bits
        shift = bits - self.level
        X = _index_to_transpose(k << (n * shift), n, bits)
        _transpose_to_axes(X, bits)
        return tuple(int(c) >> shift for c in X)

    def cell_to_rank(self, cell):
        """Inverse of :meth:`rank_to_cell`."""
        n, bits = self.dimension, self._ref_bits
        if len(cell) != n:
            raise CurveError(f"expected {n} coordinates, got {len(cell)}")
        side = 1 << self.level
        if any(not 0 <= int(c) < side for c in cell):
            raise CurveError(f"cell {tuple(cell)} outside the level-{self.level} grid")
        shift = bits - self.level
        X = np.array([int(c) << shift for c in cell], dtype=np.int64)
        _axes_to_transpose(X, bits)
        return int(_transpose_to_index(X, bits)) >> (n * shift)

    def cells(self, ranks):
        """Vectorized :meth:`rank_to_cell`: ``(len(ranks), N)`` integer array."""
        ranks = np.asarray(ranks, dtype=np.int64).ravel()
        if ranks.size and (ranks.min() < 0 or ranks.max() >= self.n_cells):
            raise CurveError(f"ranks must lie in [0, {self.n_cells})")
        return _ranks_to_cells(ranks, self.dimension, self._ref_bits, self._ref_bits - self.level)

    def ranks(self, cells):
        """Vectorized :meth:`cell_to_rank` for an ``(n, N)`` integer array."""
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, self.dimension)
        if cells.size and (cells.min() < 0 or cells.max() >= 1 << self.level):
            raise CurveError(f"cells outside the level-{self.level} grid")
        return _cells_to_ranks(cells, self._ref_bits, self._ref_bits - self.level)

    def rank_of(self, x):
        """Rank of the subinterval of [0, 1] containing ``x``."""
        k = int(np.floor(x * float(self.n_cells)))
        return min(k, self.n_cells - 1)

    def cell_center(self, k):
        h = 2.0 ** -self.level
        return np.array([-0.5 + (c + 0.5) * h for c in self.rank_to_cell(k)])


def map_to_cube(curve, x):
    """Image of ``x`` in ``[0, 1]`` on the cube ``[-1/2, 1/2]^N``."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise CurveError(f"x = {x!r} is outside [0, 1]")
    if curve.dimension == 1:
        return np.array([x - 0.5])
    return curve.cell_center(curve.rank_of(x))


def map_to_polyline(curve, x):
    """Continuous image of ``x`` on the polyline through the cell centers.

    Points closer than the curve resolution still get distinct images, which
    the search needs once intervals shrink below ``2**-(d*N)``.
    """
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise CurveError(f"x = {x!r} is outside [0, 1]")
    if curve.dimension == 1:
        return np.array([x - 0.5])
    n = curve.n_cells
    t = x * n - 0.5
    if t <= 0.0:
        return curve.cell_center(0)
    if t >= n - 1:
        return curve.cell_center(n - 1)
    k = int(t)
    frac = t - k
    a = curve.cell_center(k)
    return a + frac * (curve.cell_center(k + 1) - a)


def map_many(curve, xs, polyline=False):
    """Vectorized :func:`map_to_cube` (or :func:`map_to_polyline`); returns ``(n, N)``."""
    xs = np.asarray(xs, dtype=float).ravel()
    if xs.size and (xs.min() < 0.0 or xs.max() > 1.0):
        raise CurveError("every x must lie in [0, 1]")
    if curve.dimension == 1:
        return (xs - 0.5)[:, None]
    n = curve.n_cells
    h = 2.0 ** -curve.level
    if not polyline:
        k = np.minimum(np.floor(xs * n).astype(np.int64), n - 1)
        return -0.5 + (curve.cells(k) + 0.5) * h
    t = np.clip(xs * n - 0.5, 0.0, n - 1)
    k = np.minimum(t.astype(np.int64), n - 2)
    frac = (t - k)[:, None]
    a = -0.5 + (curve.cells(k) + 0.5) * h
    b = -0.5 + (curve.cells(k + 1) + 0.5) * h
    return a + frac * (b - a)


def scale_to_domain(point, domain):
    """Affine map from the canonical cube onto ``domain``."""
    point = np.asarray(point, dtype=float)
    if point.shape != (domain.dim,):
        raise ValueError(f"point has shape {point.shape}, domain has dimension {domain.dim}")
    a = np.asarray(domain.lower)
    b = np.asarray(domain.upper)
    return a + (b - a) * (point + 0.5)


def scale_from_domain(y, domain):
    """Inverse of :func:`scale_to_domain`."""
    y = np.asarray(y, dtype=float)
    if y.shape != (domain.dim,):
        raise ValueError(f"point has shape {y.shape}, domain has dimension {domain.dim}")
    a = np.asarray(domain.lower)
    b = np.asarray(domain.upper)
    return (y - a) / (b - a) - 0.5


def holder_distance(x1, x2, N):
    """``|x1 - x2| ** (1/N)``."""
    return abs(x1 - x2) ** (1.0 / N)


def resolution(curve):
    """Smallest separation on [0, 1] the curve can tell apart: ``2**-(d*N)``."""
    return 2.0 ** -(curve.level * curve.dimension)
