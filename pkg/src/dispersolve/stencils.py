"""Finite-difference weights on a unit-spaced lattice, computed exactly.

Weights come from the moment (Vandermonde) conditions solved in rational
arithmetic, so a stencil on n nodes reproduces every polynomial of degree
<= n-1 without rounding error.  All lattices here are integer offsets in
units of the grid spacing h; callers scale by h**-order.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np


def _solve_rational(matrix, rhs):
    """Gauss-Jordan on Fraction entries; matrix is a list of row lists."""
    n = len(rhs)
    aug = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular stencil system")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col]
        aug[col] = [v / inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


@lru_cache(maxsize=None)
def lattice_weights(offsets: tuple[int, ...], point: int, order: int) -> tuple[float, ...]:
    """Weights w with sum(w * f(offsets)) ~ f^(order)(point) on unit spacing.

    Exact for polynomials of degree <= len(offsets) - 1.  Requires
    order < len(offsets).
    """
    n = len(offsets)
    if order >= n:
        raise ValueError(f"derivative order {order} needs more than {n} nodes")
    rows = [[(Fraction(o) - point) ** p for o in offsets] for p in range(n)]
    rhs = [factorial(p) if p == order else 0 for p in range(n)]
    w = _solve_rational(rows, rhs)
    return tuple(float(v) for v in w)


def centered_weights(order: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Minimal centered stencil of formal order 2 for the given derivative.

    Half-width (order+1)//2; the even-width bonus of symmetric stencils makes
    both parities second-order accurate.
    """
    half = (order + 1) // 2
    offsets = tuple(range(-half, half + 1))
    return offsets, lattice_weights(offsets, 0, order)


def onesided_weights(order: int, npts: int | None = None) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """One-sided stencil at offset 0 over nodes 0..npts-1 (default order+2 nodes)."""
    if npts is None:
        npts = order + 2
    offsets = tuple(range(npts))
    return offsets, lattice_weights(offsets, 0, order)


@lru_cache(maxsize=None)
def shifted_window_weights(window: int, point: int, order: int) -> tuple[float, ...]:
    """Weights for f^(order)(point) from nodes 0..window-1 (point inside the window)."""
    offsets = tuple(range(window))
    return lattice_weights(offsets, point, order)


@lru_cache(maxsize=None)
def constrained_extension(constraint_orders: tuple[int, ...],
                          data_offsets: tuple[int, ...],
                          ghost_offsets: tuple[int, ...],
                          degree: int) -> tuple[tuple[float, ...], ...]:
    """Ghost values by polynomial extension through boundary constraints.

    Builds the unique polynomial p of the given degree whose derivatives of
    the listed orders vanish at offset 0 and which interpolates the data
    nodes, then evaluates p at the ghost offsets.  Returns one weight row per
    ghost, each acting on the data-node values.  The constraint count plus
    the data count must equal degree + 1.
    """
    n_con = len(constraint_orders)
    n_dat = len(data_offsets)
    if n_con + n_dat != degree + 1:
        raise ValueError("constraints + data must match polynomial dimension")
    # Homogeneous constraints D^i p(0) = 0 strike the monomials x^i, leaving
    # a reduced basis; this assumes constraint_orders == 0..n_con-1 style
    # prefixes, which is all the boundary closures need.
    basis = [d for d in range(degree + 1) if d not in constraint_orders]
    if len(basis) != n_dat:
        raise ValueError("constraint orders must be distinct and <= degree")
    mat = [[Fraction(o) ** d for d in basis] for o in data_offsets]
    rows = []
    for g in ghost_offsets:
        # p(g) = phi(g) . c with M c = u  =>  weights solve M^T w = phi(g)
        mat_t = [[mat[r][c] for r in range(n_dat)] for c in range(n_dat)]
        phi = [Fraction(g) ** d for d in basis]
        w = _solve_rational(mat_t, phi)
        rows.append(tuple(float(v) for v in w))
    return tuple(rows)


def as_array(weights) -> np.ndarray:
    return np.asarray(weights, dtype=float)
