"""Stationary and time-dependent linear solves behind the dispersion operator.

The stationary problem (a + A)u = g is a single banded LU solve; the
evolution problem u_t + A u = f marches with Crank-Nicolson, reusing one
banded factorization for every step.  The evolution also records the
discrete time derivative from the scheme's defining relation u_t = f - A u,
which downstream modules need for the nonlinear forcing and the contraction
metric.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack

from .errors import (GridMismatchError, GridSizingError, NumericalFailureError,
                     ParameterError)
from .grid import Grid, GridFunction, l2_norm, sobolev_norm_sq
from .operator import DispersionOperator

CONDITION_LIMIT = 1e14


class BandedLU:
    """One-shot banded LU factorization with a crude conditioning guard.

    The guard compares the extreme magnitudes of the U diagonal; it is a
    lower bound on the true condition number, cheap enough to run on every
    factorization, and catches the near-singular boundary closures it is
    there to detect.
    """

    def __init__(self, ab: np.ndarray, kl: int, ku: int):
        lu, piv, info = lapack.dgbtrf(ab, kl, ku)
        if info != 0:
            raise NumericalFailureError(
                f"banded LU failed with LAPACK info={info}", pivot=0.0)
        diag = np.abs(lu[kl + ku, :])
        small = float(diag.min())
        large = float(diag.max())
        if small == 0.0 or large / small > CONDITION_LIMIT:
            raise NumericalFailureError(
                f"factorization condition estimate {large / max(small, 1e-300):.3e} "
                f"exceeds {CONDITION_LIMIT:.1e}", pivot=small)
        self._lu = lu
        self._piv = piv
        self._kl = kl
        self._ku = ku

    def solve(self, b: np.ndarray) -> np.ndarray:
        x, info = lapack.dgbtrs(self._lu, self._kl, self._ku, b, self._piv)
        if info != 0:
            raise NumericalFailureError(f"banded solve failed with info={info}")
        return x


_lu_cache: "weakref.WeakKeyDictionary[DispersionOperator, dict]" = weakref.WeakKeyDictionary()


def _factorize(op: DispersionOperator, alpha: float, beta: float) -> BandedLU:
    per_op = _lu_cache.setdefault(op, {})
    key = (float(alpha), float(beta))
    lu = per_op.get(key)
    if lu is None:
        lu = BandedLU(op.banded(alpha, beta), op.kl, op.ku)
        if len(per_op) > 16:
            per_op.clear()
        per_op[key] = lu
    return lu


@dataclass(frozen=True)
class StationaryResult:
    """Solution of (a + A)u = g with its residual and measured bound witness."""

    u: GridFunction
    residual: float
    bound_ratio: float


def _diagonal_matvec(offsets, diagonals, x):
    """Shifted multiply-add matvec from diagonal storage, any float dtype."""
    n = x.size
    y = np.zeros(n, dtype=x.dtype)
    for off, diag in zip(offsets, diagonals):
        if off >= 0:
            y[: n - off] += diag[off:] * x[off:]
        else:
            y[-off:] += diag[: n + off] * x[: n + off]
    return y


def stationary_solve(op: DispersionOperator, a: float, g: GridFunction) -> StationaryResult:
    """Solve a*u + A u = g by banded LU with extended-precision refinement.

    Evaluating the residual of an operator of magnitude h^-(2l+1) cancels
    catastrophically in double precision, so residuals are accumulated in
    long-double and the solution is iteratively refined until the residual
    certification holds; past the extended-precision floor the solve raises
    instead of returning an uncertified result.
    """
    if a <= 0:
        raise ParameterError(f"shift a must be positive, got {a}")
    if g.grid != op.grid:
        raise GridMismatchError("data grid does not match the operator grid")
    lu = _factorize(op, a, 1.0)
    g_norm = l2_norm(g)
    h = op.grid.h

    dia = op.matrix.todia()
    diagonals = dia.data.astype(np.longdouble)
    g_ld = g.values.astype(np.longdouble)
    a_ld = np.longdouble(a)

    uv = lu.solve(g.values)
    best_uv, best_res = uv, np.inf
    for _ in range(4):
        uv_ld = uv.astype(np.longdouble)
        res_ld = a_ld * uv_ld + _diagonal_matvec(dia.offsets, diagonals, uv_ld) - g_ld
        residual = float(np.sqrt(h * float(res_ld @ res_ld)))
        if residual < best_res:
            best_uv, best_res = uv, residual
        if residual <= 1e-12 * (g_norm + 1.0):
            break
        uv = uv - lu.solve(res_ld.astype(np.float64))
    uv, residual = best_uv, best_res

    u = GridFunction(op.grid, uv)
    if residual > 1e-10 * (g_norm + 1.0):
        raise NumericalFailureError(
            f"stationary residual {residual:.3e} above 1e-10*(||g||+1); "
            "the operator magnitude exceeds what double precision can certify")
    ratio = 0.0 if g_norm == 0 else np.sqrt(sobolev_norm_sq(u, 2 * op.l + 1)) / g_norm
    return StationaryResult(u, residual, float(ratio))


@dataclass
class Trajectory:
    """Time-indexed nodal states and their discrete time derivatives.

    ``values`` and ``dvalues`` are (M+1, N) arrays over uniform times; row m
    is the state at times[m].  ``dvalues`` comes from the scheme's defining
    relation, not from re-differencing states.
    """

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    dvalues: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.dvalues = np.asarray(self.dvalues, dtype=float)
        m = self.times.size
        if self.values.shape != (m, self.grid.n) or self.dvalues.shape != (m, self.grid.n):
            raise GridMismatchError("trajectory arrays do not match times x grid")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n_samples(self) -> int:
        return self.times.size

    def state(self, m: int) -> GridFunction:
        return GridFunction(self.grid, self.values[m])

    def dstate(self, m: int) -> GridFunction:
        return GridFunction(self.grid, self.dvalues[m])

    def final(self) -> GridFunction:
        return self.state(self.n_samples - 1)

    def consistency_defect(self) -> float:
        """Max norm gap between stored du/dt and centered differencing of states."""
        if self.n_samples < 3:
            raise GridSizingError("need at least 3 samples for a centered check")
        centered = (self.values[2:] - self.values[:-2]) / (2 * self.dt)
        gap = self.dvalues[1:-1] - centered
        return float(np.sqrt(self.grid.h * np.max(np.sum(gap ** 2, axis=1))))

    @classmethod
    def constant(cls, u0: GridFunction, times: np.ndarray) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        m = times.size
        vals = np.tile(u0.values, (m, 1))
        return cls(u0.grid, times, vals, np.zeros_like(vals))


def time_axis(dt: float, t_end: float) -> np.ndarray:
    """Uniform time samples covering [0, t_end] with step closest to dt."""
    if dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")
    if t_end < dt * (1 - 1e-12):
        raise ParameterError(f"horizon {t_end} is shorter than one step {dt}")
    steps = max(1, round(t_end / dt))
    return np.linspace(0.0, t_end, steps + 1)


def _forcing_samples(f, times: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Forcing at the time nodes and at the half steps, as (M+1,N)/(M,N) arrays."""
    m = times.size
    if f is None:
        return np.zeros((m, grid.n)), np.zeros((m - 1, grid.n))
    if isinstance(f, Trajectory):
        if f.grid != grid:
            raise GridMismatchError("forcing grid does not match")
        if f.times.size != m or not np.allclose(f.times, times, rtol=0, atol=1e-12 * max(times[-1], 1)):
            raise GridMismatchError("forcing trajectory times do not match the solve")
        at_nodes = f.values
        at_half = 0.5 * (f.values[:-1] + f.values[1:])
        return at_nodes, at_half

    def sample(t):
        ft = f(t)
        return ft.values if isinstance(ft, GridFunction) else np.asarray(ft, dtype=float)

    at_nodes = np.stack([sample(t) for t in times])
    half_times = 0.5 * (times[:-1] + times[1:])
    at_half = np.stack([sample(t) for t in half_times])
    return at_nodes, at_half


def linear_evolve(op: DispersionOperator, u0: GridFunction, f, dt: float,
                  t_end: float) -> Trajectory:
    """Crank-Nicolson march of u_t + A u = f from u0 over [0, t_end].

    ``f`` may be None, a callable t -> GridFunction/array, or a Trajectory on
    the same time axis (sampled at half steps by endpoint averaging).  The
    requested dt is rounded so the steps tile [0, t_end] exactly.
    """
    if u0.grid != op.grid:
        raise GridMismatchError("initial data grid does not match the operator")
    times = time_axis(dt, t_end)
    step = float(times[1] - times[0])
    grid = op.grid
    n = grid.n

    f_nodes, f_half = _forcing_samples(f, times, grid)
    lu = _factorize(op, 1.0, step / 2.0)
    explicit = sp.identity(n, format="csr") - (step / 2.0) * op.matrix

    m_steps = times.size - 1
    vals = np.empty((m_steps + 1, n))
    vals[0] = u0.values
    u = u0.values
    for m in range(m_steps):
        rhs = explicit @ u + step * f_half[m]
        u = lu.solve(rhs)
        if not np.all(np.isfinite(u)):
            raise NumericalFailureError(
                f"non-finite state after step {m + 1}", step=m + 1)
        vals[m + 1] = u

    dvals = f_nodes - (op.matrix @ vals.T).T
    return Trajectory(grid, times, vals, dvals)
