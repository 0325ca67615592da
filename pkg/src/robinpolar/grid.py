"""Uniform grids on [-pi, pi], piecewise-constant sources and convex test functions.

Sources live on ``n_cells`` uniform cells with ``n_cells`` even, so that 0 is a
cell boundary and reflections about multiples of half a cell width permute
cells exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

PI = math.pi


@dataclass(frozen=True)
class Grid:
    n_cells: int

    def __post_init__(self):
        if not isinstance(self.n_cells, (int, np.integer)) or isinstance(self.n_cells, bool):
            raise TypeError(f"n_cells must be an integer, got {self.n_cells!r}")
        if self.n_cells < 2 or self.n_cells % 2:
            raise ValueError(f"n_cells must be a positive even integer, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def cell_width(self) -> float:
        return 2 * PI / self.n_cells

    @property
    def boundaries(self) -> np.ndarray:
        # (2i - N) * pi / N keeps the endpoints and 0 exact
        n = self.n_cells
        return (2 * np.arange(n + 1) - n) * PI / n

    @property
    def midpoints(self) -> np.ndarray:
        n = self.n_cells
        return (2 * np.arange(n) + 1 - n) * PI / n

    def refined(self, factor: int) -> "Grid":
        return Grid(self.n_cells * factor)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Non-negative piecewise-constant function, one value per cell."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.shape != (self.grid.n_cells,):
            raise ValueError(f"expected {self.grid.n_cells} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if np.any(vals < 0):
            raise ValueError("grid functions must be non-negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values) -> "GridFunction":
        values = np.asarray(values, dtype=float)
        return cls(Grid(values.size), values)

    @classmethod
    def from_callable(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Sample ``fn`` at the cell midpoints."""
        return cls(grid, np.broadcast_to(fn(grid.midpoints), (grid.n_cells,)))

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    @property
    def total(self) -> float:
        return integrate(self)

    def same_as(self, other: "GridFunction") -> bool:
        """Exact cellwise identity on the same grid."""
        return self.grid == other.grid and bool(np.array_equal(self.values, other.values))

    def refined(self, factor: int) -> "GridFunction":
        return GridFunction(self.grid.refined(factor), np.repeat(self.values, factor))

    def support_measure(self) -> float:
        return self.grid.cell_width * int(np.count_nonzero(self.values))


def integrate(f: GridFunction) -> float:
    return f.grid.cell_width * math.fsum(f.values)


def l1_distance(f: GridFunction, g: GridFunction) -> float:
    if f.grid != g.grid:
        raise ValueError("grid functions live on different grids")
    return f.grid.cell_width * math.fsum(np.abs(f.values - g.values))


def lp_norm(f: GridFunction, p: float) -> float:
    if p == math.inf:
        return float(np.max(np.abs(f.values)))
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    vals = np.abs(f.values)
    top = vals.max()
    if top == 0:
        return 0.0
    # scale by the max so large p does not overflow
    return float(top * (f.grid.cell_width * math.fsum((vals / top) ** p)) ** (1.0 / p))


# -- convex test functions ---------------------------------------------------

_KINDS = ("power", "hinge", "exponential", "identity")


@dataclass(frozen=True)
class ConvexTestFunction:
    """A convex, nondecreasing function on [0, inf) from a closed family.

    ``power(p)`` is ``max(x, 0) ** p``, ``hinge(t)`` is ``max(x - t, 0)``,
    ``exponential(r)`` is ``exp(r x)``, ``identity`` is ``x``.
    """

    kind: str
    param: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown convex function kind {self.kind!r}")
        p = float(self.param)
        if self.kind == "power" and not p >= 1:
            raise ValueError(f"power exponent must be >= 1, got {p}")
        if self.kind == "hinge" and not p >= 0:
            raise ValueError(f"hinge threshold must be >= 0, got {p}")
        if self.kind == "exponential" and not p > 0:
            raise ValueError(f"exponential rate must be > 0, got {p}")
        if not math.isfinite(p):
            raise ValueError("parameter must be finite")
        object.__setattr__(self, "param", p)

    @classmethod
    def power(cls, p: float) -> "ConvexTestFunction":
        return cls("power", p)

    @classmethod
    def hinge(cls, t: float) -> "ConvexTestFunction":
        return cls("hinge", t)

    @classmethod
    def exponential(cls, r: float) -> "ConvexTestFunction":
        return cls("exponential", r)

    @classmethod
    def identity(cls) -> "ConvexTestFunction":
        return cls("identity", 1.0)

    @classmethod
    def parse(cls, text: str) -> "ConvexTestFunction":
        """Parse a descriptor such as ``power:2``, ``hinge:0.5`` or ``identity``."""
        kind, _, arg = text.strip().partition(":")
        kind = kind.strip()
        if kind == "identity":
            if arg.strip():
                raise ValueError("identity takes no parameter")
            return cls.identity()
        if not arg.strip():
            raise ValueError(f"{kind!r} needs a parameter, e.g. {kind}:2")
        return cls(kind, float(arg))

    @property
    def descriptor(self) -> str:
        if self.kind == "identity":
            return "identity"
        return f"{self.kind}:{self.param:g}"

    @property
    def strictly_increasing(self) -> bool:
        return self.kind != "hinge"

    @property
    def strictly_convex(self) -> bool:
        return self.kind == "exponential" or (self.kind == "power" and self.param > 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            return np.maximum(x, 0.0) ** self.param
        if self.kind == "hinge":
            return np.maximum(x - self.param, 0.0)
        if self.kind == "exponential":
            return np.exp(self.param * x)
        return x.copy()


Phi = Union[ConvexTestFunction, Callable[[np.ndarray], np.ndarray]]


def phi_eval(phi: Phi, x):
    out = phi(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def convex_mean(u, phi: Phi) -> float:
    """Composite Simpson approximation of the integral of ``phi(u)`` over [-pi, pi].

    ``u`` is a temperature profile carrying boundary and midpoint samples.
    Each cell uses the rule h/6 (left + 4 mid + right); the error is O(h^4)
    for smooth ``phi``.
    """
    ub = np.asarray(u.boundary_values)
    um = np.asarray(u.midpoint_values)
    pb = phi(ub)
    pm = phi(um)
    h = u.grid.cell_width
    return h / 6.0 * math.fsum(np.concatenate([pb[:-1], 4.0 * pm, pb[1:]]))


# -- CSV serialization -------------------------------------------------------


def format_grid_function(f: GridFunction) -> str:
    lines = [f"# n_cells={f.n_cells} domain=-pi:pi"]
    lines += [repr(float(v)) for v in f.values]
    return "\n".join(lines) + "\n"


def parse_grid_function(text: str) -> GridFunction:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing header line '# n_cells=<N> domain=-pi:pi'")
    header = dict(
        tok.split("=", 1) for tok in lines[0].lstrip("#").split() if "=" in tok
    )
    if "n_cells" not in header:
        raise ValueError("header lacks n_cells")
    if header.get("domain", "-pi:pi") != "-pi:pi":
        raise ValueError(f"unsupported domain {header['domain']!r}")
    n = int(header["n_cells"])
    body = lines[1:]
    if len(body) != n:
        raise ValueError(f"header declares {n} cells but {len(body)} values follow")
    values = []
    for i, ln in enumerate(body, start=2):
        try:
            v = float(ln)
        except ValueError:
            raise ValueError(f"line {i}: not a number: {ln!r}") from None
        if v < 0:
            raise ValueError(f"line {i}: negative value {v}")
        values.append(v)
    return GridFunction(Grid(n), np.array(values))


def write_grid_function(path, f: GridFunction) -> None:
    Path(path).write_text(format_grid_function(f))


def read_grid_function(path) -> GridFunction:
    return parse_grid_function(Path(path).read_text())
