"""Independent reference implementations used only by the tests.

None of these share code paths with the package beyond the data types.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad

from robinpolar.grid import PI, Grid, GridFunction


def constant_source_solution(alpha: float, x):
    """Exact solution of -u'' = 1 with the Robin conditions: (pi^2 - x^2)/2 + pi/alpha."""
    x = np.asarray(x, dtype=float)
    return (PI**2 - x**2) / 2 + PI / alpha


def green_direct(alpha: float, x: float, y: float) -> float:
    c = alpha / (1 + alpha * PI)
    return -0.5 * c * x * y - 0.5 * abs(x - y) + 0.5 / c


def solution_by_quadrature(alpha: float, f: GridFunction, x: float) -> float:
    """Adaptive quadrature of G(x, .) f over each cell, splitting at the kink."""
    bd = f.grid.boundaries
    total = 0.0
    for i, v in enumerate(f.values):
        if v == 0:
            continue
        a, b = bd[i], bd[i + 1]
        pts = [x] if a < x < b else None
        val, _ = quad(lambda y: green_direct(alpha, x, y), a, b, points=pts, epsabs=1e-14, epsrel=1e-14)
        total += v * val
    return total


def value_at(f: GridFunction, x: float) -> float:
    """Value of the step function at a point strictly inside a cell; 0 outside [-pi, pi]."""
    if not -PI < x < PI:
        return 0.0
    i = int(math.floor((x + PI) / f.grid.cell_width))
    return float(f.values[min(i, f.n_cells - 1)])


def polarize_pointwise(f: GridFunction, b: float) -> GridFunction:
    """Polarization towards 0 evaluated from its pointwise definition at cell midpoints."""
    out = []
    for x in f.grid.midpoints:
        xr = 2 * b - x
        here, there = value_at(f, x), value_at(f, xr)
        on_zero_side = x < b if b > 0 else x > b
        if abs(x - b) < 1e-12:
            out.append(here)
        elif on_zero_side:
            out.append(max(here, there))
        else:
            out.append(min(here, there))
    return GridFunction(f.grid, np.array(out))


def continuum_sdr_on(f: GridFunction, n_cells: int) -> GridFunction:
    """f#(x) = f*(2|x|) sampled at the midpoints of an n_cells grid.

    f* is built from the distribution of f: the k-th largest value occupies
    [k h, (k+1) h) on [0, 2 pi].
    """
    h = f.grid.cell_width
    desc = np.sort(f.values)[::-1]
    grid = Grid(n_cells)
    vals = []
    for x in grid.midpoints:
        t = 2 * abs(x)
        k = min(int(math.floor(t / h + 1e-12)), f.n_cells - 1)
        vals.append(desc[k])
    return GridFunction(grid, np.array(vals))


def brute_max_product(f: np.ndarray, g: np.ndarray) -> float:
    """Largest sum of f_i g_sigma(i) over permutations, via sorting both."""
    return float(np.dot(np.sort(f), np.sort(g)))


def fd_poisson_vertex(alpha: float, f_vals: np.ndarray, m: int) -> tuple:
    """Vertex-centred second-order scheme with ghost points, on m intervals.

    Used only to cross-check the constant-source case, for which it is exact.
    """
    n = len(f_vals)
    x = np.linspace(-PI, PI, m + 1)
    h = 2 * PI / m
    idx = np.clip(((x + PI) / (2 * PI) * n).astype(int), 0, n - 1)
    rhs = f_vals[idx].astype(float)
    A = np.zeros((m + 1, m + 1))
    for i in range(1, m):
        A[i, i - 1 : i + 2] = [-1, 2, -1]
    A[1:m] /= h * h
    # ghost point from the Robin condition
    A[0, 0], A[0, 1] = (2 + 2 * alpha * h) / h**2, -2 / h**2
    A[m, m], A[m, m - 1] = (2 + 2 * alpha * h) / h**2, -2 / h**2
    return x, np.linalg.solve(A, rhs)
