"""Experiment configuration: a flat ``key = value`` file plus flag overrides.

Example::

    # campaign.cfg
    n_cells = 64
    alpha = random          # or a positive number
    seed = 7
    trials = 100
    phi_family = power:1, power:2, exponential:0.5, hinge:0.25
    p_list = 1, 2, 4, inf
    source = random_piecewise:6
    strategy = both
    b_stride = 8
    tol.polar_convex = 1e-9
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .grid import ConvexTestFunction, Grid
from .inequalities import DEFAULT_TOLERANCES
from .sources import SourceSpec, parse_real

DEFAULT_PHI_FAMILY = ("power:1", "power:2", "power:3", "exponential:0.5", "hinge:0.25", "identity")
DEFAULT_P_LIST = (1.0, 2.0, 4.0, math.inf)
STRATEGIES = ("greedy", "random", "both")


class ConfigError(ValueError):
    """Invalid configuration; the message names the file line or field."""


@dataclass(frozen=True)
class ExperimentConfig:
    n_cells: int = 64
    alpha: Optional[float] = 1.0  # None: drawn per trial
    seed: int = 0
    trials: int = 10
    phi_family: tuple = DEFAULT_PHI_FAMILY
    p_list: tuple = DEFAULT_P_LIST
    source: str = "random_piecewise:6"
    strategy: str = "both"
    workers: Optional[int] = None
    b: Optional[float] = None
    b_stride: int = 8
    tolerance_overrides: dict = field(default_factory=dict)
    corrupt_check: Optional[str] = None  # test hook: swaps a checker's sides

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            Grid(self.n_cells)
        except (TypeError, ValueError):
            raise ConfigError(f"n_cells: must be a positive even integer, got {self.n_cells!r}") from None
        if self.alpha is not None and not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigError(f"alpha: must be a positive finite number or 'random', got {self.alpha!r}")
        if self.trials < 0:
            raise ConfigError(f"trials: must be >= 0, got {self.trials}")
        if self.seed < 0:
            raise ConfigError(f"seed: must be >= 0, got {self.seed}")
        if not self.phi_family:
            raise ConfigError("phi_family: must name at least one function")
        for d in self.phi_family:
            try:
                ConvexTestFunction.parse(d)
            except ValueError as e:
                raise ConfigError(f"phi_family: {d!r}: {e}") from None
        for p in self.p_list:
            if not p >= 1:
                raise ConfigError(f"p_list: every p must be >= 1 or inf, got {p!r}")
        try:
            SourceSpec.parse(self.source)
        except ValueError as e:
            raise ConfigError(f"source: {e}") from None
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy: must be one of {', '.join(STRATEGIES)}, got {self.strategy!r}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if self.b_stride < 1:
            raise ConfigError(f"b_stride: must be >= 1, got {self.b_stride}")
        for name, v in self.tolerance_overrides.items():
            if name.split(":", 1)[0] not in DEFAULT_TOLERANCES:
                raise ConfigError(f"tol.{name}: unknown check; known: {', '.join(DEFAULT_TOLERANCES)}")
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"tol.{name}: must be a finite non-negative number, got {v!r}")

    @property
    def grid(self) -> Grid:
        return Grid(self.n_cells)

    @property
    def phis(self) -> list:
        return [ConvexTestFunction.parse(d) for d in self.phi_family]

    @property
    def source_spec(self) -> SourceSpec:
        return SourceSpec.parse(self.source)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _parse_int(v: str) -> int:
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _parse_p(v: str) -> float:
    return math.inf if v.strip().lower() in ("inf", "infinity") else float(v)


def _parse_list(v: str) -> tuple:
    return tuple(t.strip() for t in v.split(",") if t.strip())


def _parse_alpha(v: str):
    return None if v.strip().lower() == "random" else parse_real(v)


def _parse_optional_int(v: str):
    return None if v.strip().lower() in ("auto", "none", "") else _parse_int(v)


def _parse_optional_real(v: str):
    return None if v.strip().lower() in ("none", "") else parse_real(v)


_FIELD_PARSERS = {
    "n_cells": _parse_int,
    "alpha": _parse_alpha,
    "seed": _parse_int,
    "trials": _parse_int,
    "phi_family": _parse_list,
    "p_list": lambda v: tuple(_parse_p(t) for t in _parse_list(v)),
    "source": str.strip,
    "strategy": str.strip,
    "workers": _parse_optional_int,
    "b": _parse_optional_real,
    "b_stride": _parse_int,
}


def parse_field(key: str, value: str):
    """Parse one config value; raises ConfigError naming ``key``."""
    key = key.strip()
    if key.startswith("tol."):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key}: not a number: {value.strip()!r}") from None
    if key not in _FIELD_PARSERS:
        raise ConfigError(f"unknown key {key!r}; known: {', '.join(_FIELD_PARSERS)}, tol.<check>")
    try:
        return _FIELD_PARSERS[key](value)
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from None


def apply_fields(base: ExperimentConfig, fields: dict, where: Optional[dict] = None) -> ExperimentConfig:
    """Apply raw string ``fields`` (config keys, ``tol.<name>`` included)."""
    where = where or {}
    changes = {}
    tols = dict(base.tolerance_overrides)
    for key, raw in fields.items():
        prefix = where.get(key, "")
        try:
            value = parse_field(key, raw)
        except ConfigError as e:
            raise ConfigError(f"{prefix}{e}") from None
        if key.startswith("tol."):
            tols[key[4:]] = value
        else:
            changes[key] = value
    changes["tolerance_overrides"] = tols
    try:
        return dataclasses.replace(base, **changes)
    except ConfigError as e:
        bad = str(e).split(":", 1)[0].strip()
        raise ConfigError(f"{where.get(bad, '')}{e}") from None


def parse_config_text(text: str, origin: str = "<config>", base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    fields, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in fields:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        fields[key] = value
        where[key] = f"{origin}:{lineno}: "
    return apply_fields(base or ExperimentConfig(), fields, where)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e.strerror or e}") from None
    return parse_config_text(text, str(path))
