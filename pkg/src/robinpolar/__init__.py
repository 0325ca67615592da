"""Polarization and symmetric decreasing rearrangement for the 1-D Robin problem."""

from .grid import (
    ConvexTestFunction,
    Grid,
    GridFunction,
    convex_mean,
    integrate,
    l1_distance,
    lp_norm,
    read_grid_function,
    write_grid_function,
)
from .rearrange import (
    PolarizationCenter,
    admissible_centers,
    decreasing_rearrangement,
    is_equidistributed,
    is_symmetric_decreasing,
    iterate_to_sdr,
    polarization_equality_set,
    polarize,
    refine_for_sdr,
    sdr,
    sdr_equality_set,
)
from .robin import (
    RobinParams,
    TemperatureProfile,
    green,
    green_sdr_closed_form,
    solution_at,
    solve,
    solve_fd_oracle,
)
from .inequalities import CheckReport, DEFAULT_TOLERANCES
from .config import ExperimentConfig, load_config

__all__ = [
    "CheckReport",
    "ConvexTestFunction",
    "DEFAULT_TOLERANCES",
    "ExperimentConfig",
    "Grid",
    "GridFunction",
    "PolarizationCenter",
    "RobinParams",
    "TemperatureProfile",
    "admissible_centers",
    "convex_mean",
    "decreasing_rearrangement",
    "green",
    "green_sdr_closed_form",
    "integrate",
    "is_equidistributed",
    "is_symmetric_decreasing",
    "iterate_to_sdr",
    "l1_distance",
    "load_config",
    "lp_norm",
    "polarization_equality_set",
    "polarize",
    "read_grid_function",
    "refine_for_sdr",
    "sdr",
    "sdr_equality_set",
    "solution_at",
    "solve",
    "solve_fd_oracle",
    "write_grid_function",
]
