"""The ten acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line (shown in the terminal summary and on
stdout with ``-s``) before asserting.
"""

import math
import time

import numpy as np

from acceptance_log import record
from robinpolar.campaign import random_alpha, random_center, trial_rng
from robinpolar.cli import EXIT_OK, convergence_rows, main
from robinpolar.config import DEFAULT_PHI_FAMILY, ExperimentConfig
from robinpolar.grid import PI, ConvexTestFunction, Grid, GridFunction
from robinpolar.inequalities import (
    EQUALITY,
    HOLDS,
    VIOLATED,
    check_green_pair_inequalities,
    check_hl_polarization,
    check_kernel_chain,
    check_max_comparison,
    check_theorem_polar_convex,
    check_theorem_sdr_convex,
)
from robinpolar.rearrange import polarization_equality_set, polarize, refine_for_sdr, sdr
from robinpolar.robin import RobinParams, green, solve, solve_fd_oracle
from robinpolar.sources import random_piecewise

N = 64
PHIS = [ConvexTestFunction.parse(d) for d in DEFAULT_PHI_FAMILY]


def _random_phi(rng):
    return PHIS[int(rng.integers(len(PHIS)))]


def _source(rng, n=N, blocks=6):
    return random_piecewise(rng, Grid(n), blocks)


def test_criterion_01_analytic_solution():
    t0 = time.perf_counter()
    params = RobinParams(1 / PI)
    errs = []
    for n in (32, 64):
        u = solve(params, GridFunction(Grid(n), np.ones(n)))
        x = u.xs
        errs.append(float(np.abs(u.boundary_values - (3 * PI**2 - x**2) / 2).max()))
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-10 and elapsed < 1.0
    record(1, "analytic solution", ok, f"max errors {errs[0]:.2e} (n=32), {errs[1]:.2e} (n=64); {elapsed:.3f}s")
    assert ok


def test_criterion_02_oracle_equivalence():
    t0 = time.perf_counter()
    params = RobinParams(1.0)
    # per-cell uniform sources: every wall cell carries source, so each gap is
    # a clean O(h^2) quantity whose ratio can be measured source by source
    gaps4, ratios = [], []
    for t in range(50):
        f = GridFunction(Grid(N), trial_rng(202, t).random(N))
        u = solve(params, f)
        g4 = u.max_gap(solve_fd_oracle(params, f, 4))
        g8 = u.max_gap(solve_fd_oracle(params, f, 8))
        gaps4.append(g4)
        ratios.append(g4 / g8)
    # the campaign's block sources; those with empty wall blocks are reproduced
    # to rounding, so the order is read off the batch max-norm gap
    pw4, pw8 = [], []
    for t in range(50):
        f = _source(trial_rng(203, t))
        u = solve(params, f)
        pw4.append(u.max_gap(solve_fd_oracle(params, f, 4)))
        pw8.append(u.max_gap(solve_fd_oracle(params, f, 8)))
    batch_ratio = max(pw4) / max(pw8)
    elapsed = time.perf_counter() - t0
    ok = (
        max(gaps4) < 1e-3
        and max(pw4) < 1e-3
        and all(3.5 <= r <= 4.5 for r in ratios)
        and 3.5 <= batch_ratio <= 4.5
        and elapsed < 10
    )
    record(
        2, "oracle equivalence", ok,
        f"max gap {max(gaps4):.2e}, per-source ratio in [{min(ratios):.4f}, {max(ratios):.4f}], "
        f"block sources: max gap {max(pw4):.2e}, batch ratio {batch_ratio:.4f}; {elapsed:.2f}s",
    )
    assert ok


def test_criterion_03_polarization_campaign():
    t0 = time.perf_counter()
    worst, mismatches, equalities = math.inf, 0, 0
    for t in range(200):
        rng = trial_rng(303, t)
        params = RobinParams(random_alpha(rng))
        f = _source(rng)
        c = random_center(rng, f.grid)
        phi = _random_phi(rng)
        if t % 4 == 0:
            f = polarize(f, c)  # exercise the equality case
        r = check_theorem_polar_convex(f, c, phi, params)
        worst = min(worst, r.slack)
        if phi.strictly_increasing:
            fixed = polarize(f, c).same_as(f)
            equalities += fixed
            mismatches += (r.verdict == EQUALITY) != fixed
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-9 and mismatches == 0 and elapsed < 60
    record(3, "polarization raises convex means", ok,
           f"min slack {worst:.3e}, {equalities} equality cases, {mismatches} mismatches; {elapsed:.2f}s")
    assert ok


def test_criterion_04_sdr_chain():
    t0 = time.perf_counter()
    worst, mismatches, equalities = math.inf, 0, 0
    for t in range(200):
        rng = trial_rng(404, t)
        params = RobinParams(random_alpha(rng))
        f = _source(rng)
        phi = _random_phi(rng)
        if t % 4 == 0:
            f = sdr(refine_for_sdr(f))
        r = check_theorem_sdr_convex(f, phi, params)
        worst = min(worst, *r.extra["chain_slacks"], r.slack)
        if phi.strictly_increasing:
            g = refine_for_sdr(f)
            same = g.same_as(sdr(g))
            equalities += same
            mismatches += (r.verdict == EQUALITY) != same
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-9 and mismatches == 0 and elapsed < 60
    record(4, "f <= f_H <= f# chain", ok,
           f"min link slack {worst:.3e}, {equalities} equality cases, {mismatches} mismatches; {elapsed:.2f}s")
    assert ok


def test_criterion_05_max_comparison():
    worst, mismatches, off_center, equalities = math.inf, 0, 0, 0
    for t in range(200):
        rng = trial_rng(505, t)
        params = RobinParams(random_alpha(rng))
        f = _source(rng)
        if t % 4 == 0:
            f = sdr(refine_for_sdr(f))
        r = check_max_comparison(f, params)
        worst = min(worst, r.slack)
        off_center += r.extra["argmax_sdr"] != 0.0
        g = refine_for_sdr(f)
        same = g.same_as(sdr(g))
        equalities += same
        mismatches += (r.verdict == EQUALITY) != same
    ok = worst >= -1e-9 and off_center == 0 and mismatches == 0
    record(5, "max u_f <= u_f#(0)", ok,
           f"min slack {worst:.3e}, argmax off 0: {off_center}, {equalities} equality cases, "
           f"{mismatches} mismatches")
    assert ok


def test_criterion_06_kernel_pair_inequalities():
    rng = trial_rng(606, 0)
    violations, worst = 0, math.inf
    for _ in range(10_000):
        params = RobinParams(random_alpha(rng))
        b = 0.0
        while b == 0.0:
            b = float(rng.uniform(-PI, PI))
        lo, hi = (b, PI) if b > 0 else (-PI, b)
        x, y = (float(v) for v in rng.uniform(lo, hi, 2))
        for r in check_green_pair_inequalities(params, b, x, y):
            violations += r.verdict == VIOLATED
            worst = min(worst, r.slack)
    ok = violations == 0
    record(6, "kernel pair inequalities", ok, f"{violations} violations, min slack {worst:.3e}")
    assert ok


def test_criterion_07_kernel_chain():
    rng = trial_rng(707, 0)
    bad, smallest = 0, math.inf
    for _ in range(1000):
        params = RobinParams(random_alpha(rng))
        x0 = 0.0
        while x0 == 0.0:
            x0 = float(rng.uniform(0.0, PI))
        r = check_kernel_chain(params, x0)
        gaps = r.extra["gaps"]
        smallest = min(smallest, min(gaps))
        bad += r.verdict != HOLDS or min(gaps) <= 1e-12 or r.equality_consistent is False
    at_pi = check_kernel_chain(RobinParams(1.0), PI)
    ok = bad == 0 and at_pi.verdict == EQUALITY
    record(7, "kernel value chain", ok,
           f"{bad} failures, smallest link gap {smallest:.3e}, x0 = pi closes the loose link: {at_pi.verdict}")
    assert ok


def test_criterion_08_convergence():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(phi_family=("power:2",))
    g00 = green(RobinParams(cfg.alpha), 0.0, 0.0)
    problems, steps = [], []
    for t in range(50):
        f = _source(trial_rng(808, t))
        rows, res = convergence_rows(cfg, f, "greedy")
        steps.append(len(rows) - 1)
        if rows[-1]["l1_distance"] != 0.0 or not res.converged:
            problems.append(f"source {t}: final L1 {rows[-1]['l1_distance']!r}")
        for prev, row in zip(rows, rows[1:]):
            if row["l1_distance"] > prev["l1_distance"]:
                problems.append(f"source {t} step {row['step']}: L1 increased")
            if row["mean_power_2"] < prev["mean_power_2"] - 1e-9:
                problems.append(f"source {t} step {row['step']}: mean decreased")
        for row in rows:
            if row["uniform_gap"] > g00 * row["l1_distance"] * (1 + 1e-12) + 1e-12:
                problems.append(f"source {t} step {row['step']}: gap above G(0,0) L1")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 120
    record(8, "greedy polarization reaches f#", ok,
           f"{len(problems)} problems, steps per source {min(steps)}..{max(steps)}; {elapsed:.2f}s")
    assert ok, problems[:10]


def test_criterion_09_hardy_littlewood_soundness():
    mismatches, equalities = 0, 0
    for t in range(500):
        rng = trial_rng(909, t)
        f = _source(rng, blocks=int(rng.integers(1, 7)))
        c = random_center(rng, f.grid)
        kind = t % 5
        if kind == 0:
            g = GridFunction(f.grid, np.full(N, float(rng.random())))
        elif kind == 1:
            g = f
        elif kind == 2:
            f = polarize(f, c)
            g = _source(rng)
        else:
            g = _source(rng, blocks=int(rng.integers(1, 7)))
        r = check_hl_polarization(f, g, c)
        zero = polarization_equality_set(f, g, c).measure == 0
        equalities += zero
        mismatches += (r.verdict == EQUALITY) != zero
    ok = mismatches == 0
    record(9, "product equality iff null set", ok, f"{equalities} equality cases of 500, {mismatches} mismatches")
    assert ok


def test_criterion_10_determinism(tmp_path):
    args = ["verify", "--n-cells", "64", "--trials", "100", "--seed", "10", "--alpha", "random"]
    codes, blobs = [], []
    for i, workers in enumerate(("1", "4", "4")):
        out = tmp_path / f"run{i}"
        codes.append(main([*args, "--workers", workers, "--out", str(out)]))
        blobs.append((out / "reports.jsonl").read_bytes())
    identical = blobs[0] == blobs[1] == blobs[2]
    n_lines = len(blobs[0].splitlines())
    ok = identical and codes == [EXIT_OK] * 3
    record(10, "byte-identical verify output", ok,
           f"exit codes {codes}, {n_lines} lines, identical across workers 1/4/4: {identical}")
    assert ok
