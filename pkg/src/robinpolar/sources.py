"""Source descriptors and the seeded random source generator.

A source spec is a short string:

    constant:<c>
    indicator:<a>,<length>          1 on [a, a + length]
    bump:<center>,<width>,<height>  tent of the given base width
    random_piecewise:<blocks>
    file:<path>

Real arguments accept plain numbers or multiples of pi such as ``pi/2``,
``-3pi/4`` or ``0.5*pi``. Deterministic shapes are sampled at cell midpoints.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import PI, Grid, GridFunction, read_grid_function

_PI_RE = re.compile(r"^\s*([+-]?\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")

RANDOM_ZERO_PROBABILITY = 0.3


def parse_real(text: str) -> float:
    text = text.strip()
    m = _PI_RE.match(text)
    if m:
        coef = m.group(1)
        if coef in ("", "+"):
            c = 1.0
        elif coef == "-":
            c = -1.0
        else:
            c = float(coef)
        div = float(m.group(2)) if m.group(2) else 1.0
        return c * PI / div
    return float(text)


@dataclass(frozen=True)
class SourceSpec:
    kind: str
    args: tuple = ()
    path: Optional[str] = None

    _ARITY = {"constant": 1, "indicator": 2, "bump": 3, "random_piecewise": 1}

    @classmethod
    def parse(cls, text: str) -> "SourceSpec":
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip()
        if kind == "file":
            if not rest.strip():
                raise ValueError("file source needs a path, e.g. file:source.csv")
            return cls("file", (), rest.strip())
        if kind not in cls._ARITY:
            raise ValueError(
                f"unknown source kind {kind!r}; expected one of "
                "constant, indicator, bump, random_piecewise, file"
            )
        parts = [p for p in rest.split(",") if p.strip()]
        if len(parts) != cls._ARITY[kind]:
            raise ValueError(f"{kind} takes {cls._ARITY[kind]} argument(s), got {len(parts)}")
        if kind == "random_piecewise":
            blocks = int(parts[0])
            if blocks < 1:
                raise ValueError("random_piecewise needs at least one block")
            return cls(kind, (blocks,))
        args = tuple(parse_real(p) for p in parts)
        spec = cls(kind, args)
        spec._validate()
        return spec

    def _validate(self):
        if self.kind == "constant" and self.args[0] < 0:
            raise ValueError("constant source must be non-negative")
        if self.kind == "indicator" and self.args[1] < 0:
            raise ValueError("indicator length must be non-negative")
        if self.kind == "bump" and (self.args[1] <= 0 or self.args[2] < 0):
            raise ValueError("bump needs width > 0 and height >= 0")

    @property
    def is_random(self) -> bool:
        return self.kind == "random_piecewise"

    def build(self, grid: Grid, rng: Optional[np.random.Generator] = None) -> GridFunction:
        if self.kind == "file":
            f = read_grid_function(self.path)
            if f.grid != grid:
                raise ValueError(f"{self.path}: has {f.n_cells} cells, config asks for {grid.n_cells}")
            return f
        x = grid.midpoints
        if self.kind == "constant":
            return GridFunction(grid, np.full(grid.n_cells, self.args[0]))
        if self.kind == "indicator":
            a, length = self.args
            return GridFunction(grid, ((x >= a) & (x <= a + length)).astype(float))
        if self.kind == "bump":
            c, w, height = self.args
            return GridFunction(grid, height * np.maximum(0.0, 1.0 - np.abs(x - c) / (w / 2)))
        if rng is None:
            raise ValueError("random_piecewise sources need an rng")
        return random_piecewise(rng, grid, self.args[0])

    def __str__(self) -> str:
        if self.kind == "file":
            return f"file:{self.path}"
        return f"{self.kind}:" + ",".join(repr(a) for a in self.args)


def random_piecewise(rng: np.random.Generator, grid: Grid, blocks: int) -> GridFunction:
    """Block-piecewise source, drawn in this order:

    1. ``blocks - 1`` distinct interior cell boundaries, ``rng.choice`` without
       replacement, sorted, cut the cells into blocks;
    2. one height per block from ``rng.random``;
    3. one ``rng.random`` draw per block; a block is zeroed when it falls below
       ``RANDOM_ZERO_PROBABILITY``.
    """
    n = grid.n_cells
    blocks = min(int(blocks), n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=blocks - 1, replace=False))
    heights = rng.random(blocks)
    heights[rng.random(blocks) < RANDOM_ZERO_PROBABILITY] = 0.0
    edges = np.concatenate([[0], cuts, [n]])
    return GridFunction(grid, np.repeat(heights, np.diff(edges)))
