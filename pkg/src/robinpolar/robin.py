"""Robin problem -u'' = f on [-pi, pi] with -u'(-pi) + a u(-pi) = u'(pi) + a u(pi) = 0.

``solve`` integrates the closed-form Green's function exactly against a
piecewise-constant source. ``solve_fd_oracle`` is an unrelated cell-centred
finite-difference discretization used to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .grid import PI, Grid, GridFunction, convex_mean

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class RobinParams:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (math.isfinite(a) and a > 0):
            raise ValueError(f"alpha must be a positive finite number, got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def c_alpha(self) -> float:
        return self.alpha / (1 + self.alpha * PI)


def _check_domain(*arrays):
    for a in arrays:
        if np.any(np.abs(a) > PI + _DOMAIN_SLACK):
            raise ValueError("arguments of the Green's function must lie in [-pi, pi]")


def green(params: RobinParams, x, y):
    """G(x, y) = -c x y / 2 - |x - y| / 2 + 1 / (2c)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_domain(x, y)
    c = params.c_alpha
    # x * y first keeps G exactly symmetric in floating point
    out = -0.5 * c * (x * y) - 0.5 * np.abs(x - y) + 0.5 / c
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=128)
def _cell_kernel(alpha: float, n_cells: int, xs_key: bytes) -> np.ndarray:
    xs = np.frombuffer(xs_key)
    c = RobinParams(alpha).c_alpha
    bd = Grid(n_cells).boundaries
    a, b = bd[:-1], bd[1:]
    x = xs[:, None]
    # (y - x)|y - x| / 2 is an antiderivative of |y - x|, so no kink splitting is needed
    k = (
        -0.25 * c * x * (b * b - a * a)
        - 0.25 * ((b - x) * np.abs(b - x) - (a - x) * np.abs(a - x))
        + (b - a) / (2 * c)
    )
    k.setflags(write=False)
    return k


def cell_kernel(params: RobinParams, grid: Grid, xs) -> np.ndarray:
    """Matrix of integrals of G(x, .) over each cell, one row per point x."""
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(xs, dtype=float)))
    _check_domain(xs)
    return _cell_kernel(params.alpha, grid.n_cells, xs.tobytes())


def solution_at(params: RobinParams, f: GridFunction, x):
    """u_f at arbitrary points of [-pi, pi]."""
    scalar = np.ndim(x) == 0
    u = cell_kernel(params, f.grid, x) @ f.values
    return float(u[0]) if scalar else u


@dataclass(frozen=True, eq=False)
class TemperatureProfile:
    grid: Grid
    boundary_values: np.ndarray = field(repr=False)
    midpoint_values: np.ndarray = field(repr=False)
    source_ref: str = ""

    def __post_init__(self):
        for name, size in (("boundary_values", self.grid.n_cells + 1), ("midpoint_values", self.grid.n_cells)):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (size,):
                raise ValueError(f"{name} must have {size} entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def xs(self) -> np.ndarray:
        return self.grid.boundaries

    def samples(self):
        """All boundary and midpoint samples in increasing x."""
        n = self.grid.n_cells
        x = (np.arange(2 * n + 1) - n) * PI / n
        u = np.empty(2 * n + 1)
        u[0::2] = self.boundary_values
        u[1::2] = self.midpoint_values
        return x, u

    def max(self) -> float:
        """Exact maximum: u is the quadratic through the boundary and midpoint
        samples of each cell, so interior vertices are included."""
        ua, um, ub = self.boundary_values[:-1], self.midpoint_values, self.boundary_values[1:]
        # u = ua + bt t + at t^2 for t in [0, 1] across each cell
        at = 2 * ua - 4 * um + 2 * ub
        bt = -3 * ua + 4 * um - ub
        best = self.boundary_values.max()
        with np.errstate(divide="ignore", invalid="ignore"):
            t = -bt / (2 * at)
            inside = (at < 0) & (t > 0) & (t < 1)
        if inside.any():
            a, b = at[inside], bt[inside]
            best = max(best, float((ua[inside] - b * b / (4 * a)).max()))
        return float(best)

    def min(self) -> float:
        # concave on each cell, so the minimum sits on a boundary
        return float(self.boundary_values.min())

    def at_zero(self) -> float:
        return float(self.boundary_values[self.grid.n_cells // 2])

    def lp_norm(self, p: float) -> float:
        if p == math.inf:
            return max(self.max(), -self.min())
        if not p >= 1:
            raise ValueError(f"p must be >= 1 or inf, got {p}")
        return convex_mean(self, lambda v: np.abs(v) ** p) ** (1.0 / p)

    def convex_mean(self, phi) -> float:
        return convex_mean(self, phi)

    def second_differences(self) -> np.ndarray:
        return np.diff(self.boundary_values, 2)

    def is_concave(self, tol: float = 1e-10) -> bool:
        return bool(np.all(self.second_differences() <= tol))

    def robin_residuals(self, params: RobinParams):
        """|-u'(-pi) + a u(-pi)| and |u'(pi) + a u(pi)| with one-sided
        second-order derivatives over the first and last half cells."""
        h = self.grid.cell_width
        ub, um = self.boundary_values, self.midpoint_values
        d_left = (-3 * ub[0] + 4 * um[0] - ub[1]) / h
        d_right = (3 * ub[-1] - 4 * um[-1] + ub[-2]) / h
        a = params.alpha
        return abs(-d_left + a * ub[0]), abs(d_right + a * ub[-1])

    def max_gap(self, other: "TemperatureProfile") -> float:
        if other.grid != self.grid:
            raise ValueError("profiles live on different grids")
        return float(
            max(
                np.abs(self.boundary_values - other.boundary_values).max(),
                np.abs(self.midpoint_values - other.midpoint_values).max(),
            )
        )


def solve(params: RobinParams, f: GridFunction, source_ref: str = "") -> TemperatureProfile:
    """Exact representation-formula solution sampled at boundaries and midpoints."""
    g = f.grid
    ub = cell_kernel(params, g, g.boundaries) @ f.values
    um = cell_kernel(params, g, g.midpoints) @ f.values
    return TemperatureProfile(g, ub, um, source_ref)


def solve_fd_oracle(params: RobinParams, f: GridFunction, refinement: int = 4) -> TemperatureProfile:
    """Cell-centred central differences on ``refinement * n_cells`` cells.

    Robin faces use the quadratic through the three nearest cell centres,
    u(-pi) ~ (15 u0 - 10 u1 + 3 u2)/8 and u'(-pi) ~ (-2 u0 + 3 u1 - u2)/H
    (mirrored at pi), with u2 eliminated through the first interior equation
    so the system stays tridiagonal. Values at coarse points come from
    averaging neighbouring centres (interior) or the same extrapolation (ends).

    For a step source the centre values carry an O(H^2) offset proportional to
    the local source value, which the face averaging cancels in the interior.
    What remains at the coarse points is an O(H^2) error driven by the source
    in the cells next to the walls; a source vanishing there is reproduced to
    rounding.
    """
    if refinement < 1:
        raise ValueError("refinement must be >= 1")
    r = int(refinement)
    n = f.n_cells
    m = n * r
    if m < 3:
        raise ValueError("oracle grid needs at least 3 cells")
    big_h = 2 * PI / m
    fine = np.repeat(f.values, r)
    a = params.alpha
    inv2 = 1.0 / big_h**2

    diag = np.full(m, 2 * inv2)
    upper = np.full(m, -inv2)
    lower = np.full(m, -inv2)
    rhs = fine.copy()
    edge = 1.0 / big_h + 1.5 * a
    side = -1.0 / big_h - 0.5 * a
    diag[0], upper[0] = edge, side
    rhs[0] = fine[1] * (big_h + 3 * a * big_h**2 / 8)
    diag[-1], lower[-1] = edge, side
    rhs[-1] = fine[-2] * (big_h + 3 * a * big_h**2 / 8)

    banded = np.zeros((3, m))
    banded[0, 1:] = upper[:-1]
    banded[1] = diag
    banded[2, :-1] = lower[1:]
    u = solve_banded((1, 1), banded, rhs)
    assert np.all(np.isfinite(u)), "Robin system is nonsingular for alpha > 0"

    def at_face(idx):
        idx = np.asarray(idx)
        return 0.5 * (u[idx - 1] + u[idx])

    ub = np.empty(n + 1)
    ub[1:-1] = at_face(r * np.arange(1, n))
    ub[0] = (15 * u[0] - 10 * u[1] + 3 * u[2]) / 8
    ub[-1] = (15 * u[-1] - 10 * u[-2] + 3 * u[-3]) / 8
    if r % 2:
        um = u[r * np.arange(n) + r // 2]
    else:
        um = at_face(r * np.arange(n) + r // 2)
    return TemperatureProfile(f.grid, ub, um, f"fd_oracle(r={r})")


# -- symmetric decreasing rearrangement of the kernel --------------------------


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    breakpoints: np.ndarray
    values: np.ndarray

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def __call__(self, y):
        out = np.interp(y, self.breakpoints, self.values)
        return float(out) if np.ndim(out) == 0 else out


def green_sdr_nodes(params: RobinParams, x0: float):
    """(y0, y1) for |x0|: y0 solves G(|x0|, y) = G(|x0|, pi) on the rising branch
    and y1 = (y0 - pi)/2 is where the rearrangement changes slope."""
    a = abs(float(x0))
    c = params.c_alpha
    y0 = (c * a * PI + PI - 2 * a) / (c * a - 1)
    return y0, (y0 - PI) / 2


def green_sdr_closed_form(params: RobinParams, x0: float) -> PiecewiseLinear:
    """Symmetric decreasing rearrangement of y -> G(x0, y) on [-pi, pi].

    Linear on [-pi, y1] and [y1, 0] (mirrored to the right) through
    G(x0, -pi), G(x0, pi) and G(x0, x0); for x0 = 0 it is G(0, .) itself.
    """
    _check_domain(np.asarray(x0))
    if x0 == 0:
        return PiecewiseLinear(np.array([-PI, 0.0, PI]), green(params, 0.0, np.array([-PI, 0.0, PI])))
    a = abs(float(x0))
    _, y1 = green_sdr_nodes(params, a)
    low = green(params, a, -PI)
    mid = green(params, a, PI)
    top = green(params, a, a)
    if y1 >= 0 or math.isclose(y1, 0.0, abs_tol=1e-14):
        # x0 = +-pi: the kernel is a single line, no interior slope change
        return PiecewiseLinear(np.array([-PI, 0.0, PI]), np.array([low, top, low]))
    return PiecewiseLinear(
        np.array([-PI, y1, 0.0, -y1, PI]), np.array([low, mid, top, mid, low])
    )


def argmax_least_abs(u: TemperatureProfile, tol: float = 1e-12) -> float:
    """Boundary point of maximal u closest to 0; ties between +-x go to +x."""
    ub = u.boundary_values
    n = u.grid.n_cells
    idx = np.flatnonzero(ub >= ub.max() - tol)
    dist = np.abs(2 * idx - n)
    best = idx[dist == dist.min()]
    return float(u.grid.boundaries[best.max()])


# -- CSV export ---------------------------------------------------------------


def format_profile_csv(u: TemperatureProfile) -> str:
    rows = ["x,u"]
    rows += [f"{x!r},{v!r}" for x, v in zip(u.xs.tolist(), u.boundary_values.tolist())]
    return "\n".join(rows) + "\n"


def parse_profile_csv(text: str):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "x,u":
        raise ValueError("profile CSV must start with 'x,u'")
    data = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]])
    return data[:, 0], data[:, 1]


def write_profile_csv(path, u: TemperatureProfile) -> None:
    Path(path).write_text(format_profile_csv(u))


def read_profile_csv(path):
    return parse_profile_csv(Path(path).read_text())

