"""Command-line front end: ``solve``, ``verify``, ``converge`` and ``rearrange``.

Exit codes: 0 success, 1 verification failure, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .campaign import run_campaign, trial_rng
from .config import ConfigError, ExperimentConfig, apply_fields, load_config
from .grid import GridFunction, write_grid_function
from .inequalities import tolerance
from .rearrange import (
    PolarizationCenter,
    decreasing_rearrangement,
    is_symmetric_decreasing,
    iterate_to_sdr,
    polarize,
    refine_for_sdr,
    sdr,
)
from .robin import RobinParams, green, solve, write_profile_csv

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2

# flag -> config key
_FLAG_KEYS = {
    "n_cells": "n_cells",
    "alpha": "alpha",
    "seed": "seed",
    "trials": "trials",
    "strategy": "strategy",
    "workers": "workers",
    "source": "source",
    "b": "b",
    "b_stride": "b_stride",
    "phi": "phi_family",
    "p_list": "p_list",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--n-cells", dest="n_cells")
    common.add_argument("--alpha", help="Robin coefficient, or 'random' (verify only)")
    common.add_argument("--seed")
    common.add_argument("--trials")
    common.add_argument("--strategy", help="greedy, random or both")
    common.add_argument("--workers", help="worker processes for verify (default: all cores)")
    common.add_argument("--source", help="e.g. constant:1, indicator:pi/2,pi/2, file:f.csv")
    common.add_argument("--b", help="polarization center (multiple of half a cell width)")
    common.add_argument("--b-stride", dest="b_stride", help="verify every k-th admissible center")
    common.add_argument("--phi", help="comma-separated convex functions, e.g. power:2,hinge:0.5")
    common.add_argument("--p-list", dest="p_list", help="comma-separated p values, inf allowed")
    common.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                        help="override a checker tolerance (repeatable)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--corrupt-check", dest="corrupt_check", help=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="robinpolar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="solve for a source and export profiles")
    p.add_argument("--with-sdr", action="store_true", help="also export the profile of f#")
    sub.add_parser("verify", parents=[common], help="randomized campaign over every checker")
    sub.add_parser("converge", parents=[common], help="iterated polarization towards f#")
    sub.add_parser("rearrange", parents=[common], help="dump f*, f# and f_H")
    return parser


def resolve_config(args) -> ExperimentConfig:
    base = load_config(args.config) if args.config else ExperimentConfig()
    fields, where = {}, {}
    for attr, key in _FLAG_KEYS.items():
        v = getattr(args, attr)
        if v is not None:
            fields[key] = v
            where[key] = f"--{attr.replace('_', '-')}: "
    for item in args.tol:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol: expected NAME=VALUE, got {item!r}")
        fields[f"tol.{name.strip()}"] = value
        where[f"tol.{name.strip()}"] = "--tol: "
    cfg = apply_fields(base, fields, where)
    if args.corrupt_check:
        cfg = cfg.replace(corrupt_check=args.corrupt_check)
    return cfg


def _source(cfg: ExperimentConfig) -> GridFunction:
    spec = cfg.source_spec
    return spec.build(cfg.grid, trial_rng(cfg.seed, 0) if spec.is_random else None)


def _alpha(cfg: ExperimentConfig) -> float:
    if cfg.alpha is None:
        raise ConfigError("alpha: 'random' is only meaningful for verify")
    return cfg.alpha


def _center(cfg: ExperimentConfig, grid) -> Optional[PolarizationCenter]:
    if cfg.b is None:
        return None
    try:
        return PolarizationCenter.at(grid, cfg.b)
    except ValueError as e:
        raise ConfigError(f"b: {e}") from None


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(cfg: ExperimentConfig, args) -> int:
    params = RobinParams(_alpha(cfg))
    f = _source(cfg)
    out = _out_dir(args)
    targets = [("f", f)]
    if args.with_sdr:
        targets.append(("sdr", sdr(refine_for_sdr(f))))
    center = _center(cfg, f.grid)
    if center is not None:
        targets.append(("polar", polarize(f, center)))
    for label, src in targets:
        u = solve(params, src, label)
        path = out / f"profile_{label}.csv"
        write_profile_csv(path, u)
        left, right = u.robin_residuals(params)
        print(
            f"{label}: u(0)={u.at_zero()!r} max={u.max()!r} "
            f"robin_residuals=({left:.3e}, {right:.3e}) concave={u.is_concave()} -> {path}"
        )
    return EXIT_OK


def cmd_verify(cfg: ExperimentConfig, args) -> int:
    result = run_campaign(cfg)
    out = _out_dir(args)
    path = out / "reports.jsonl"
    path.write_text(result.jsonl())
    s = result.summary
    print(
        f"{s['total']} reports over {cfg.trials} trials: "
        + ", ".join(f"{k}={v}" for k, v in sorted(s["counts"].items()))
        + f"; equality mismatches={s['equality_mismatches']}; max violation={s['max_violation']:.3e} -> {path}"
    )
    if not result.ok:
        for line in result.failures[:20]:
            print(line, file=sys.stderr)
        if len(result.failures) > 20:
            print(f"... {len(result.failures) - 20} more", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _column(desc: str) -> str:
    return "mean_" + desc.replace(":", "_")


def convergence_rows(cfg: ExperimentConfig, f: GridFunction, strategy: str):
    """Trace rows (dicts) for one strategy, starting with step 0, and the result."""
    params = RobinParams(_alpha(cfg))
    phis = cfg.phis
    res = iterate_to_sdr(f, strategy=strategy, seed=cfg.seed)
    us = solve(params, res.target)
    g00 = green(params, 0.0, 0.0)
    rows = []
    states = [(0, None, res.start, res.initial_distance)]
    states += [(n + 1, c.b, fn, d) for n, (c, fn, d) in enumerate(zip(res.centers, res.iterates, res.distances))]
    for step, b, fn, d in states:
        u = solve(params, fn)
        row = {"step": step, "b": b, "l1_distance": d, "uniform_gap": u.max_gap(us), "bound": g00 * d}
        for phi in phis:
            row[_column(phi.descriptor)] = u.convex_mean(phi)
        rows.append(row)
    return rows, res


def check_trace(rows, cfg: ExperimentConfig) -> list:
    """Problems found in a trace: L1 increase, gap above G(0,0) L1, phi-mean decrease."""
    problems = []
    tol = tolerance("polar_convex", cfg.tolerance_overrides)
    for prev, row in zip(rows, rows[1:]):
        if row["l1_distance"] > prev["l1_distance"]:
            problems.append(f"step {row['step']}: L1 distance increased")
        for key in row:
            if key.startswith("mean_") and row[key] < prev[key] - tol:
                problems.append(f"step {row['step']}: {key} decreased by {prev[key] - row[key]:.3e}")
    for row in rows:
        if row["uniform_gap"] > row["bound"] * (1 + 1e-12) + 1e-12:
            problems.append(f"step {row['step']}: uniform gap exceeds G(0,0) times L1 distance")
    return problems


def format_convergence_csv(rows) -> str:
    keys = list(rows[0])
    lines = [",".join(keys)]
    for r in rows:
        lines.append(",".join("" if r[k] is None else repr(r[k]) for k in keys))
    return "\n".join(lines) + "\n"


def parse_convergence_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    keys = lines[0].split(",")
    out = []
    for ln in lines[1:]:
        rec = {}
        for k, v in zip(keys, ln.split(",")):
            rec[k] = int(v) if k == "step" else (None if v == "" else float(v))
        out.append(rec)
    return out


def cmd_converge(cfg: ExperimentConfig, args) -> int:
    f = _source(cfg)
    out = _out_dir(args)
    strategies = ("greedy", "random") if cfg.strategy == "both" else (cfg.strategy,)
    status = EXIT_OK
    for strategy in strategies:
        rows, res = convergence_rows(cfg, f, strategy)
        path = out / f"converge_{strategy}.csv"
        path.write_text(format_convergence_csv(rows))
        problems = check_trace(rows, cfg)
        final = rows[-1]
        print(
            f"{strategy}: {len(rows) - 1} steps, final L1={final['l1_distance']!r}, "
            f"final gap={final['uniform_gap']!r}, converged={res.converged} -> {path}"
        )
        if not res.converged or final["uniform_gap"] != 0.0:
            msg = f"{strategy}: did not reach f# (L1 distance {final['l1_distance']!r})"
            if strategy == "greedy":
                problems.append(msg)
            else:
                print(msg)
        for p in problems:
            print(f"{strategy}: {p}", file=sys.stderr)
        if problems:
            status = EXIT_VIOLATION
    return status


def cmd_rearrange(cfg: ExperimentConfig, args) -> int:
    f = _source(cfg)
    out = _out_dir(args)
    fr = refine_for_sdr(f)
    dumps = [("source", f), ("decreasing", decreasing_rearrangement(f)), ("sdr", sdr(fr))]
    center = _center(cfg, f.grid)
    if center is not None:
        dumps.append(("polar", polarize(f, center)))
    for label, g in dumps:
        path = out / f"{label}.csv"
        write_grid_function(path, g)
        print(f"{label}: n_cells={g.n_cells} total={g.total!r} -> {path}")
    if fr is not f:
        print(f"sdr: exported on {fr.n_cells} cells so that it is exactly even")
    print(f"source is symmetric decreasing: {is_symmetric_decreasing(f)}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "converge": cmd_converge, "rearrange": cmd_rearrange}


_SIGNED_FLAGS = ("--b", "--alpha")


def _join_signed_values(argv):
    # argparse reads "-pi/2" as an option; "--b=-pi/2" it accepts
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _SIGNED_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_signed_values(argv))
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
