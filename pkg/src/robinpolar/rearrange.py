"""Decreasing and symmetric decreasing rearrangements, polarization towards 0,
equality sets of the product inequalities, and iterated polarization.

Conventions
-----------
Cell ``i`` has center ``x_i = (2i + 1 - N) pi / N``. A polarization center is
``b = k pi / N`` (a multiple of half a cell width) with ``0 < |k| < N``. The
reflection ``x -> 2b - x`` then sends cell ``i`` to cell ``N + k - 1 - i``, so
every polarization is an exact permutation of cell values. When ``k`` is odd,
``b`` is a cell midpoint and the cell containing it is mapped onto itself.

``sdr`` places the sorted values center-out, right first: the largest value
goes to cell ``N/2`` (just right of 0), the next to ``N/2 - 1``, then
``N/2 + 1``, and so on. Cells at equal distance from 0 form a *ring*; the
result is even exactly when each ring receives two equal values, which is
always the case after ``refine_for_sdr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from .grid import PI, Grid, GridFunction, l1_distance


@dataclass(frozen=True)
class PolarizationCenter:
    """Reflection point ``b = half_steps * pi / n_cells`` of a grid."""

    grid: Grid
    half_steps: int

    def __post_init__(self):
        k = self.half_steps
        if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
            raise TypeError("half_steps must be an integer")
        if k == 0 or abs(k) >= self.grid.n_cells:
            raise ValueError(
                f"center must lie in (-pi, 0) or (0, pi); got half_steps={k} "
                f"on a {self.grid.n_cells}-cell grid"
            )
        object.__setattr__(self, "half_steps", int(k))

    @classmethod
    def at(cls, grid: Grid, b: float) -> "PolarizationCenter":
        """Center at the real point ``b``, which must be a multiple of h/2."""
        k = round(b * grid.n_cells / PI)
        if abs(k * PI / grid.n_cells - b) > 1e-9 * max(1.0, abs(b)):
            raise ValueError(f"b={b!r} is not aligned to half a cell width of the grid")
        return cls(grid, k)

    @property
    def b(self) -> float:
        return self.half_steps * PI / self.grid.n_cells

    @property
    def on_cell_boundary(self) -> bool:
        return self.half_steps % 2 == 0

    @property
    def half_line(self) -> str:
        return f"(-inf, {self.b:g})" if self.half_steps > 0 else f"({self.b:g}, inf)"

    def reflect(self, x):
        return 2 * self.b - np.asarray(x, dtype=float)


def admissible_centers(grid: Grid) -> list:
    """All centers, ordered by |b| and then b > 0 first."""
    ks = []
    for m in range(1, grid.n_cells):
        ks += [m, -m]
    return [PolarizationCenter(grid, k) for k in ks]


@lru_cache(maxsize=64)
def _pairing(n: int, k: int):
    """Partner cell, partner-in-range mask and 'keeps the max' mask for center k."""
    i = np.arange(n)
    j = n + k - 1 - i
    valid = (j >= 0) & (j < n)
    jc = np.clip(j, 0, n - 1)
    # doubled distances of cell centers from 0
    closer = np.abs(2 * i + 1 - n) < np.abs(2 * jc + 1 - n)
    for arr in (jc, valid, closer):
        arr.setflags(write=False)
    return jc, valid, closer


@lru_cache(maxsize=16)
def _all_pairings(n: int):
    ks = np.array([c.half_steps for c in admissible_centers(Grid(n))])
    i = np.arange(n)
    j = n + ks[:, None] - 1 - i[None, :]
    valid = (j >= 0) & (j < n)
    jc = np.clip(j, 0, n - 1)
    closer = np.abs(2 * i[None, :] + 1 - n) < np.abs(2 * jc + 1 - n)
    return ks, jc, valid, closer


def _polarize_values(vals: np.ndarray, jc, valid, closer) -> np.ndarray:
    partner = vals[..., jc] if vals.ndim == 1 else np.take_along_axis(vals, jc, axis=-1)
    hi = np.maximum(vals, partner)
    lo = np.minimum(vals, partner)
    return np.where(valid, np.where(closer, hi, lo), vals)


# -- rearrangements ----------------------------------------------------------


def decreasing_rearrangement(f: GridFunction) -> GridFunction:
    """f* carried from [0, 2 pi] to [-pi, pi] by t -> t - pi: values sorted non-increasing."""
    return GridFunction(f.grid, np.sort(f.values)[::-1])


@lru_cache(maxsize=64)
def _center_out_order(n: int) -> np.ndarray:
    half = n // 2
    order = np.empty(n, dtype=int)
    order[0::2] = half + np.arange(half)
    order[1::2] = half - 1 - np.arange(half)
    order.setflags(write=False)
    return order


def ring_index(grid: Grid) -> np.ndarray:
    """Distance rank of each cell from 0 (both cells of a ring share it)."""
    n = grid.n_cells
    return np.abs(2 * np.arange(n) + 1 - n) // 2


def sdr(f: GridFunction) -> GridFunction:
    """Symmetric decreasing rearrangement at cell resolution (right-first placement)."""
    out = np.empty(f.n_cells)
    out[_center_out_order(f.n_cells)] = np.sort(f.values)[::-1]
    return GridFunction(f.grid, out)


def has_even_sdr(f: GridFunction) -> bool:
    """True when ``sdr(f)`` is mirror symmetric, i.e. it is the exact continuum f#."""
    v = np.sort(f.values)
    return bool(np.array_equal(v[0::2], v[1::2]))


def refine_for_sdr(f: GridFunction) -> GridFunction:
    """Return ``f`` itself, or ``f`` on twice as many cells if that is needed for
    its symmetric decreasing rearrangement to be exact (even) on the grid.

    The continuum f# of an N-cell step function jumps at multiples of h/2, so
    one halving of the cells always suffices.
    """
    return f if has_even_sdr(f) else f.refined(2)


def is_symmetric_decreasing(f: GridFunction) -> bool:
    """Every value in a ring is >= every value in the rings further out."""
    rings = ring_index(f.grid)
    n_rings = f.n_cells // 2
    lo = np.full(n_rings, np.inf)
    hi = np.full(n_rings, -np.inf)
    np.minimum.at(lo, rings, f.values)
    np.maximum.at(hi, rings, f.values)
    return bool(np.all(lo[:-1] >= hi[1:]))


def polarize(f: GridFunction, center: PolarizationCenter) -> GridFunction:
    """Polarization towards 0 with respect to ``center``.

    Cells whose mirror image leaves [-pi, pi] are kept (zero extension); in each
    mirrored pair the cell nearer 0 receives the larger value.
    """
    if center.grid != f.grid:
        raise ValueError("center is not aligned to this grid")
    jc, valid, closer = _pairing(f.n_cells, center.half_steps)
    return GridFunction(f.grid, _polarize_values(f.values, jc, valid, closer))


def is_equidistributed(f: GridFunction, g: GridFunction) -> bool:
    """Equal distribution functions. Grids of different resolution are compared
    after refining both to a common grid."""
    if f.grid != g.grid:
        n = math.lcm(f.n_cells, g.n_cells)
        f = f.refined(n // f.n_cells)
        g = g.refined(n // g.n_cells)
    return bool(np.array_equal(np.sort(f.values), np.sort(g.values)))


# -- equality sets -----------------------------------------------------------


@dataclass(frozen=True)
class EqualitySetReport:
    """Measure of a discrete equality-violation set and its witnesses.

    ``dimension`` is 1 for sets of cells and 2 for sets of cell pairs.
    """

    measure: float
    witness_cells: tuple = field(default=())
    dimension: int = 1

    @property
    def empty(self) -> bool:
        return len(self.witness_cells) == 0


def polarization_equality_set(
    f: GridFunction, g: GridFunction, center: PolarizationCenter
) -> EqualitySetReport:
    """Cells y on the 0 side of b where f and g are ordered oppositely against
    their reflections (the union of the two strict cases)."""
    if f.grid != g.grid or center.grid != f.grid:
        raise ValueError("f, g and center must share a grid")
    jc, valid, closer = _pairing(f.n_cells, center.half_steps)
    # a cell whose mirror leaves [-pi, pi] always lies on the 0 side of b
    on_h_side = np.where(valid, closer, True)
    # zero extension outside [-pi, pi]
    fr = np.where(valid, f.values[jc], 0.0)
    gr = np.where(valid, g.values[jc], 0.0)
    below = (f.values < fr) & (g.values > gr)
    above = (f.values > fr) & (g.values < gr)
    hits = np.flatnonzero(on_h_side & (below | above))
    return EqualitySetReport(f.grid.cell_width * hits.size, tuple(int(c) for c in hits), 1)


def sdr_equality_set(f: GridFunction, g: GridFunction) -> EqualitySetReport:
    """Ordered cell pairs (x, y) with f(x) < f(y) and g(x) > g(y)."""
    if f.grid != g.grid:
        raise ValueError("f and g must share a grid")
    fv, gv = f.values, g.values
    mask = (fv[:, None] < fv[None, :]) & (gv[:, None] > gv[None, :])
    xs, ys = np.nonzero(mask)
    h = f.grid.cell_width
    return EqualitySetReport(h * h * xs.size, tuple(zip(xs.tolist(), ys.tolist())), 2)


# -- iterated polarization ---------------------------------------------------


def _candidates(f: GridFunction):
    ks, jc, valid, closer = _all_pairings(f.n_cells)
    stack = np.broadcast_to(f.values, jc.shape)
    polar = _polarize_values(stack, jc, valid, closer)
    changed = np.any(polar != f.values, axis=1)
    return ks, polar, changed


def find_nontrivial_polarization(f: GridFunction) -> Optional[PolarizationCenter]:
    """A center whose polarization changes ``f``, or None when ``f`` is fixed by
    every polarization (equivalently, symmetric decreasing at cell resolution)."""
    ks, _, changed = _candidates(f)
    hits = np.flatnonzero(changed)
    if hits.size == 0:
        return None
    return PolarizationCenter(f.grid, int(ks[hits[0]]))


def greedy_center(f: GridFunction, target: GridFunction) -> Optional[PolarizationCenter]:
    """Among centers that change ``f``, the one whose polarization is closest to
    ``target`` in L1; ties go to the smallest |b|, then b > 0."""
    ks, polar, changed = _candidates(f)
    if not changed.any():
        return None
    dist = np.abs(polar - target.values).sum(axis=1)
    dist = np.where(changed, dist, np.inf)
    return PolarizationCenter(f.grid, int(ks[int(np.argmin(dist))]))


@dataclass
class ConvergenceResult:
    """Outcome of ``iterate_to_sdr``.

    ``iterates[n]`` is f_{n+1}; ``distances[n]`` its L1 distance to ``target``.
    ``converged`` is False when ``max_iters`` ran out or no polarization could
    move ``start`` further.
    """

    start: GridFunction
    target: GridFunction
    iterates: list
    centers: list
    distances: list
    initial_distance: float
    converged: bool
    strategy: str

    @property
    def final(self) -> GridFunction:
        return self.iterates[-1] if self.iterates else self.start

    @property
    def final_distance(self) -> float:
        return self.distances[-1] if self.distances else self.initial_distance

    def trace(self) -> list:
        return [
            {"step": n + 1, "b": c.b, "l1_distance": d}
            for n, (c, d) in enumerate(zip(self.centers, self.distances))
        ]


def iterate_to_sdr(
    f: GridFunction,
    strategy: str = "greedy",
    tol: float = 1e-12,
    max_iters: int = 100_000,
    seed: Optional[int] = None,
) -> ConvergenceResult:
    """Polarize repeatedly until the source equals its symmetric decreasing
    rearrangement.

    ``f`` is first passed through ``refine_for_sdr`` so that the target is the
    exact f#. Every nontrivial polarization strictly increases
    sum f(x) w(|x|) for decreasing w, so both strategies stop after finitely
    many steps; the greedy one always ends at distance 0.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if strategy not in ("greedy", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = np.random.default_rng(seed) if strategy == "random" else None

    start = refine_for_sdr(f)
    target = sdr(start)
    h = start.grid.cell_width
    current = start
    d0 = l1_distance(start, target)
    result = ConvergenceResult(start, target, [], [], [], d0, d0 <= tol, strategy)
    dist = d0
    while dist > tol and len(result.iterates) < max_iters:
        ks, polar, changed = _candidates(current)
        moves = np.flatnonzero(changed)
        if moves.size == 0:
            break
        if strategy == "greedy":
            dists = np.abs(polar[moves] - target.values).sum(axis=1)
            pick = moves[int(np.argmin(dists))]
        else:
            pick = moves[int(rng.integers(moves.size))]
        nxt = GridFunction(start.grid, polar[pick])
        new_dist = h * math.fsum(np.abs(nxt.values - target.values))
        # polarization is an L1 contraction and fixes the target
        assert new_dist <= dist * (1 + 1e-12) + 1e-300, (new_dist, dist)
        result.iterates.append(nxt)
        result.centers.append(PolarizationCenter(start.grid, int(ks[pick])))
        result.distances.append(new_dist)
        current, dist = nxt, new_dist
    result.converged = dist <= tol
    return result


def format_trace_csv(result: ConvergenceResult) -> str:
    rows = ["step,b,l1_distance"]
    rows += [f"{r['step']},{r['b']!r},{r['l1_distance']!r}" for r in result.trace()]
    return "\n".join(rows) + "\n"


def parse_trace_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split(",")[:3] != ["step", "b", "l1_distance"]:
        raise ValueError("trace CSV must start with 'step,b,l1_distance'")
    keys = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        vals = ln.split(",")
        rec = {k: (int(v) if k == "step" else float(v)) for k, v in zip(keys, vals)}
        out.append(rec)
    return out


def write_trace_csv(path, result: ConvergenceResult) -> None:
    Path(path).write_text(format_trace_csv(result))
