"""Uniform spatial grid, finite-difference derivatives, and discrete norms.

The domain (0, L) is partitioned into N interior nodes x_i = i*h with
h = L/(N+1); x_0 = 0 and x_{N+1} = L are boundary nodes.  Grid functions
store interior values plus optional explicit boundary values (functions
pinned to zero at the ends by boundary conditions simply keep the default).

Derivatives use minimal centered stencils in the bulk and one-sided closures
of the same formal order (2) near the ends.  Quadrature is composite
trapezoid over the full partition; derivative integrands get their boundary
node values from one-sided stencils so the quadrature keeps second order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import GridMismatchError, GridSizingError, NumericalFailureError
from .stencils import as_array, centered_weights, lattice_weights, shifted_window_weights


@dataclass(frozen=True)
class Grid:
    """Uniform partition of (0, length) with n interior nodes."""

    length: float
    n: int

    def __post_init__(self):
        if not self.length > 0:
            raise GridSizingError(f"interval length must be positive, got {self.length}")
        if self.n < 4:
            raise GridSizingError(f"need at least 4 interior nodes, got {self.n}")

    @property
    def h(self) -> float:
        return self.length / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        """Interior node coordinates."""
        return self.h * np.arange(1, self.n + 1)

    @property
    def nodes_full(self) -> np.ndarray:
        """All node coordinates including both boundary points."""
        return self.h * np.arange(self.n + 2)

    def trapezoid(self, full_values: np.ndarray) -> float:
        """Composite trapezoid rule over the full partition (axis -1)."""
        v = np.asarray(full_values)
        bulk = v[..., 1:-1].sum(axis=-1)
        return self.h * (bulk + 0.5 * (v[..., 0] + v[..., -1]))

    def diff_matrix(self, order: int) -> sp.csr_matrix:
        """Sparse map from interior values to D^order at the interior nodes."""
        return _diff_matrix(self.n, order) * self.h ** (-order)

    def boundary_weights(self, order: int) -> tuple[np.ndarray, np.ndarray]:
        """One-sided weights for D^order at x=0 and x=L from interior values.

        Each vector acts on the nearest order+2 interior values, listed from
        the boundary inward; scale is already in physical units.
        """
        w = as_array(_boundary_weights(order)) * self.h ** (-order)
        return w, w * (-1.0) ** order

    def derivative_full(self, values: np.ndarray, order: int) -> np.ndarray:
        """D^order sampled at every node, boundary nodes via one-sided stencils.

        ``values`` holds interior samples along the last axis; the result has
        two extra entries.
        """
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.n:
            raise GridMismatchError("value count does not match the grid")
        mat = self.diff_matrix(order)
        d_int = mat @ values if values.ndim == 1 else (mat @ values.T).T
        wl, wr = self.boundary_weights(order)
        npts = wl.size
        left = values[..., :npts] @ wl
        right = values[..., :-npts - 1:-1] @ wr
        return np.concatenate(
            [left[..., None], d_int, right[..., None]], axis=-1)

    def min_points_for(self, order: int) -> int:
        half = (order + 1) // 2
        return max(2 * half + 1, order + 2)

    def check_order(self, order: int):
        if order < 1:
            raise GridSizingError(f"derivative order must be >= 1, got {order}")
        if self.min_points_for(order) > self.n:
            raise GridSizingError(
                f"order-{order} stencil needs {self.min_points_for(order)} nodes, grid has {self.n}")


@lru_cache(maxsize=64)
def _diff_matrix(n: int, order: int) -> sp.csr_matrix:
    """Unit-spacing derivative matrix on n interior nodes (cached, unscaled)."""
    half = (order + 1) // 2
    npts = max(2 * half + 1, order + 2)
    if npts > n:
        raise GridSizingError(
            f"order-{order} stencil needs {npts} nodes, grid has {n}")
    offsets, wc = centered_weights(order)
    rows, cols, vals = [], [], []
    for i in range(n):
        if half <= i < n - half:
            for off, w in zip(offsets, wc):
                rows.append(i)
                cols.append(i + off)
                vals.append(w)
        elif i < half:
            # shifted window anchored at the first interior node
            w = shifted_window_weights(order + 2, i, order)
            for c, wv in enumerate(w):
                rows.append(i)
                cols.append(c)
                vals.append(wv)
        else:
            w = shifted_window_weights(order + 2, n - 1 - i, order)
            for c, wv in enumerate(w):
                rows.append(i)
                cols.append(n - 1 - c)
                vals.append(wv * (-1.0) ** order)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


@lru_cache(maxsize=64)
def _boundary_weights(order: int) -> tuple[float, ...]:
    """D^order at a boundary node from the nearest order+2 interior values.

    Offsets are 1..order+2 in units of h (the boundary node itself carries no
    unknown); mirror with (-1)**order for the right end.
    """
    npts = order + 2
    offsets = tuple(range(1, npts + 1))
    return lattice_weights(offsets, 0, order)


@dataclass(frozen=True)
class GridFunction:
    """Nodal samples of a spatial function on a Grid.

    ``values`` holds the interior nodes; ``left``/``right`` are explicit
    boundary values, defaulting to the homogeneous boundary data every
    function in the problem class satisfies.
    """

    grid: Grid
    values: np.ndarray
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size != self.grid.n:
            raise GridMismatchError(
                f"expected {self.grid.n} interior values, got shape {v.shape}")
        if not (np.all(np.isfinite(v)) and np.isfinite(self.left) and np.isfinite(self.right)):
            raise NumericalFailureError("grid function contains NaN or Inf")
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, grid: Grid, fn, with_boundary: bool = True) -> "GridFunction":
        """Sample a callable at the nodes; optionally record its boundary values."""
        vals = np.asarray(fn(grid.nodes), dtype=float)
        if with_boundary:
            ends = fn(np.array([0.0, grid.length]))
            return cls(grid, vals, float(ends[0]), float(ends[1]))
        return cls(grid, vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.n))

    def full_values(self) -> np.ndarray:
        return np.concatenate([[self.left], self.values, [self.right]])

    def same_grid(self, other: "GridFunction"):
        if self.grid != other.grid:
            raise GridMismatchError("grid functions live on different grids")

    def __add__(self, other):
        self.same_grid(other)
        return GridFunction(self.grid, self.values + other.values,
                            self.left + other.left, self.right + other.right)

    def __sub__(self, other):
        self.same_grid(other)
        return GridFunction(self.grid, self.values - other.values,
                            self.left - other.left, self.right - other.right)

    def __mul__(self, scalar):
        return GridFunction(self.grid, self.values * scalar,
                            self.left * scalar, self.right * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class NormReport:
    """Plain, weighted, Sobolev-seminorm, and sup summaries of one function."""

    l2: float
    weighted_l2: float
    seminorms: tuple[float, ...]
    sup: float


def diff(u: GridFunction, order: int) -> GridFunction:
    """D^order of a grid function; boundary values filled by one-sided stencils."""
    g = u.grid
    g.check_order(order)
    sampled = g.derivative_full(u.values, order)
    return GridFunction(g, sampled[1:-1], float(sampled[0]), float(sampled[-1]))


def norms(u: GridFunction, m: int = 0) -> NormReport:
    """Trapezoid-quadrature norms of u and its first m derivatives."""
    if m < 0:
        raise GridSizingError(f"seminorm count must be >= 0, got {m}")
    g = u.grid
    full = u.full_values()
    x = g.nodes_full
    l2_sq = g.trapezoid(full ** 2)
    weighted = g.trapezoid((1.0 + x) * full ** 2)
    semis = []
    for j in range(1, m + 1):
        g.check_order(j)
        dj = g.derivative_full(u.values, j)
        semis.append(float(np.sqrt(g.trapezoid(dj ** 2))))
    sup = float(np.max(np.abs(full)))
    return NormReport(float(np.sqrt(l2_sq)), float(weighted), tuple(semis), sup)


def weighted_inner(u: GridFunction, v: GridFunction) -> float:
    """Trapezoid approximation of the (1+x)-weighted pairing of u and v."""
    u.same_grid(v)
    x = u.grid.nodes_full
    return float(u.grid.trapezoid((1.0 + x) * u.full_values() * v.full_values()))


def sobolev_norm_sq(u: GridFunction, m: int) -> float:
    """Squared Sobolev norm: ||u||^2 plus all seminorms through order m."""
    rep = norms(u, m)
    return rep.l2 ** 2 + sum(s ** 2 for s in rep.seminorms)


def l2_norm(u: GridFunction) -> float:
    return norms(u, 0).l2
