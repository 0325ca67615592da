"""Randomized verification campaigns over (f, b, phi, alpha) tuples.

Trial ``t`` draws everything from ``numpy.random.default_rng([seed, t])``, so a
trial's reports depend only on (config, t). Trials may run in any order on
any number of workers; output is emitted sorted by trial index.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .grid import PI, GridFunction
from .inequalities import (
    VIOLATED,
    CheckReport,
    check_green_pair_inequalities,
    check_green_sdr,
    check_hl_polarization,
    check_hl_sdr,
    check_karamata,
    check_karamata_phi_pair,
    check_kernel_chain,
    check_lp_monotonicity,
    check_max_comparison,
    check_solution_pair_inequalities,
    check_theorem_polar_convex,
    check_theorem_sdr_convex,
    classify,
    report_to_json,
    summarize,
    tolerance,
)
from .rearrange import PolarizationCenter, admissible_centers
from .robin import RobinParams
from .sources import random_piecewise

ALPHA_RANGE = (0.1, 10.0)
MAX_RANDOM_BLOCKS = 8


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def random_alpha(rng: np.random.Generator) -> float:
    """Log-uniform on ALPHA_RANGE."""
    lo, hi = ALPHA_RANGE
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_center(rng: np.random.Generator, grid) -> PolarizationCenter:
    centers = admissible_centers(grid)
    return centers[int(rng.integers(len(centers)))]


def random_source(rng: np.random.Generator, config: ExperimentConfig) -> GridFunction:
    spec = config.source_spec
    if spec.is_random:
        return random_piecewise(rng, config.grid, spec.args[0])
    return spec.build(config.grid)


def random_majorized_pair(rng: np.random.Generator, n: int):
    """(xs, ys), both non-increasing, with ys weakly majorizing xs.

    xs is a contraction of ys towards its mean followed by a non-negative
    decrement; with probability 1/5 xs equals ys.
    """
    ys = np.sort(3.0 * rng.random(n))[::-1]
    if rng.random() < 0.2:
        return ys.copy(), ys
    lam = rng.uniform(0.0, 0.8)
    xs = lam * ys + (1 - lam) * ys.mean()
    xs = xs - rng.uniform(0.0, 0.5) * xs.min() * rng.random(n)
    return np.sort(xs)[::-1], ys


def _far_interval(center: PolarizationCenter):
    return (center.b, PI) if center.b > 0 else (-PI, center.b)


def _near_interval(center: PolarizationCenter):
    return (-PI, center.b) if center.b > 0 else (center.b, PI)


def _corrupt(r: CheckReport, overrides) -> CheckReport:
    # a checker that compares the wrong way round
    slack = r.lhs - r.rhs
    verdict = r.verdict if math.isnan(slack) else classify(slack, tolerance(r.name, overrides))
    return CheckReport(r.name, r.rhs, r.lhs, slack, verdict, r.equality_expected, r.detail, r.extra)


def run_trial(config: ExperimentConfig, trial: int) -> tuple:
    """(JSON lines, reports) for one trial, in a fixed order."""
    rng = trial_rng(config.seed, trial)
    tol = config.tolerance_overrides
    grid = config.grid
    alpha = config.alpha if config.alpha is not None else random_alpha(rng)
    params = RobinParams(alpha)
    f = random_source(rng, config)
    g = random_piecewise(rng, grid, int(rng.integers(1, MAX_RANDOM_BLOCKS + 1)))
    phis = config.phis

    reports = []
    centers = admissible_centers(grid)[:: config.b_stride]
    centers.append(random_center(rng, grid))
    for c in centers:
        reports += [check_theorem_polar_convex(f, c, phi, params, tol) for phi in phis]
        reports.append(check_hl_polarization(f, g, c, tol))
        x_far = float(rng.uniform(*_far_interval(c)))
        x_near = float(rng.uniform(*_near_interval(c)))
        for x in (x_far, x_near):
            reports += check_solution_pair_inequalities(f, c, params, x, tol)
            for phi in phis:
                reports += check_karamata_phi_pair(f, c, phi, params, x, tol)
        lo, hi = _far_interval(c)
        reports += check_green_pair_inequalities(
            params, c.b, float(rng.uniform(lo, hi)), float(rng.uniform(lo, hi)), tol
        )

    reports += [check_theorem_sdr_convex(f, phi, params, tol) for phi in phis]
    reports += check_lp_monotonicity(f, params, config.p_list, tol)
    reports.append(check_max_comparison(f, params, tol))
    reports.append(check_hl_sdr(f, g, tol))
    x0 = float(rng.uniform(0.0, PI))
    reports.append(check_kernel_chain(params, x0 if x0 > 0 else PI, tol))
    reports.append(check_green_sdr(params, float(rng.uniform(-PI, PI)), f, tolerances=tol))
    xs, ys = random_majorized_pair(rng, int(rng.integers(2, 7)))
    for phi in phis:
        reports.append(check_karamata(xs, ys, phi, tol, precondition_tol=1e-12))

    if config.corrupt_check:
        reports = [
            _corrupt(r, tol) if r.name.split(":", 1)[0] == config.corrupt_check else r
            for r in reports
        ]
    return [report_to_json(r, trial=trial, alpha=alpha) for r in reports], reports


def _trial_lines(args):
    config, trial = args
    lines, reports = run_trial(config, trial)
    return lines, summarize(reports), [
        ln for ln, r in zip(lines, reports) if r.verdict == VIOLATED or r.equality_consistent is False
    ]


@dataclass
class CampaignResult:
    lines: list
    summary: dict
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def jsonl(self) -> str:
        return "".join(ln + "\n" for ln in self.lines) + json.dumps({"summary": self.summary}, sort_keys=True) + "\n"


def _merge(summaries: list) -> dict:
    out = {"total": 0, "counts": {}, "equality_mismatches": 0, "max_violation": 0.0, "by_check": {}}
    for s in summaries:
        out["total"] += s["total"]
        out["equality_mismatches"] += s["equality_mismatches"]
        out["max_violation"] = max(out["max_violation"], s["max_violation"])
        for k, v in s["counts"].items():
            out["counts"][k] = out["counts"].get(k, 0) + v
        for name, counts in s["by_check"].items():
            slot = out["by_check"].setdefault(name, {})
            for k, v in counts.items():
                slot[k] = slot.get(k, 0) + v
    out["by_check"] = dict(sorted(out["by_check"].items()))
    return out


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def run_campaign(config: ExperimentConfig) -> CampaignResult:
    workers = config.workers or default_workers()
    jobs = [(config, t) for t in range(config.trials)]
    if workers == 1 or config.trials <= 1:
        results = list(map(_trial_lines, jobs))
    else:
        with ProcessPoolExecutor(max_workers=min(workers, config.trials)) as pool:
            # map preserves submission order, i.e. trial order
            results = list(pool.map(_trial_lines, jobs, chunksize=max(1, config.trials // (4 * workers))))
    lines = [ln for r in results for ln in r[0]]
    failures = [ln for r in results for ln in r[2]]
    summary = _merge([r[1] for r in results])
    summary["trials"] = config.trials
    summary["seed"] = config.seed
    return CampaignResult(lines, summary, failures)
