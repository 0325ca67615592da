"""Executable checks of the comparison inequalities and their equality cases.

Every check returns :class:`CheckReport` objects with ``slack = rhs - lhs``.
The verdict comes from the numeric slack; ``equality_expected`` is decided
independently on the discrete side (cellwise identity of sources, emptiness of
an equality set), so the two can be cross-checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .grid import PI, GridFunction, convex_mean
from .rearrange import (
    PolarizationCenter,
    greedy_center,
    polarization_equality_set,
    polarize,
    refine_for_sdr,
    sdr,
    sdr_equality_set,
)
from .robin import (
    RobinParams,
    argmax_least_abs,
    green,
    green_sdr_closed_form,
    solution_at,
    solve,
)

HOLDS = "holds"
EQUALITY = "holds_with_equality"
VIOLATED = "violated"
NOT_APPLICABLE = "not_applicable"

# kernel identities are exact arithmetic chains; anything integrated against
# phi carries Simpson error
DEFAULT_TOLERANCES = {
    "polar_convex": 1e-9,
    "sdr_convex": 1e-9,
    "lp_monotonicity": 1e-9,
    "max_comparison": 1e-9,
    "solution_pair": 1e-9,
    "karamata_phi_pair": 1e-9,
    "hl_polarization": 1e-12,
    "hl_sdr": 1e-12,
    "karamata": 1e-12,
    "green_pair": 1e-12,
    "kernel_chain": 1e-12,
    "green_sdr": 1e-12,
}


def tolerance(name: str, overrides: Optional[Mapping[str, float]] = None) -> float:
    family = name.split(":", 1)[0]
    if overrides:
        if name in overrides:
            return float(overrides[name])
        if family in overrides:
            return float(overrides[family])
    return DEFAULT_TOLERANCES[family]


@dataclass(frozen=True)
class CheckReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    verdict: str
    equality_expected: Optional[bool] = None
    detail: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def equality_consistent(self) -> Optional[bool]:
        """Whether the numeric equality verdict agrees with the discrete one."""
        if self.equality_expected is None or self.verdict in (VIOLATED, NOT_APPLICABLE):
            return None
        return (self.verdict == EQUALITY) == self.equality_expected

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "CheckReport":
        keys = cls.__dataclass_fields__
        return cls(**{k: v for k, v in d.items() if k in keys})


def classify(slack: float, tol: float) -> str:
    if slack < -tol:
        return VIOLATED
    if abs(slack) <= tol:
        return EQUALITY
    return HOLDS


def _report(name, lhs, rhs, equality_expected=None, tolerances=None, detail="", extra=None):
    lhs, rhs = float(lhs), float(rhs)
    slack = rhs - lhs
    return CheckReport(
        name, lhs, rhs, slack, classify(slack, tolerance(name, tolerances)),
        equality_expected, detail, dict(extra or {}),
    )


def _not_applicable(name, detail):
    nan = float("nan")
    return CheckReport(name, nan, nan, nan, NOT_APPLICABLE, None, detail, {})


def _phi_desc(phi) -> str:
    return getattr(phi, "descriptor", getattr(phi, "__name__", "phi"))


def _strictly_increasing(phi) -> bool:
    return bool(getattr(phi, "strictly_increasing", False))


# -- convex integral means ----------------------------------------------------


def check_theorem_polar_convex(
    f: GridFunction,
    center: PolarizationCenter,
    phi,
    params: RobinParams,
    tolerances=None,
) -> CheckReport:
    """Integral of phi(u_f) against the integral of phi(u_{f_H})."""
    fh = polarize(f, center)
    lhs = convex_mean(solve(params, f), phi)
    rhs = convex_mean(solve(params, fh), phi)
    same = f.same_as(fh)
    return _report(
        "polar_convex", lhs, rhs,
        same if _strictly_increasing(phi) else None,
        tolerances,
        f"b={center.b!r} phi={_phi_desc(phi)} alpha={params.alpha!r}",
        {"b": center.b, "phi": _phi_desc(phi), "alpha": params.alpha, "f_equals_fH": same},
    )


def check_theorem_sdr_convex(
    f: GridFunction, phi, params: RobinParams, tolerances=None
) -> CheckReport:
    """Integral of phi(u_f) against that of phi(u_{f#}), interpolated through the
    greedy polarization of f when f is not yet symmetric decreasing."""
    g = refine_for_sdr(f)
    gs = sdr(g)
    lhs = convex_mean(solve(params, g), phi)
    rhs = convex_mean(solve(params, gs), phi)
    center = greedy_center(g, gs)
    tol = tolerance("sdr_convex", tolerances)
    extra = {"phi": _phi_desc(phi), "alpha": params.alpha, "n_cells_used": g.n_cells}
    if center is None:
        mid = lhs
        extra["b"] = None
    else:
        mid = convex_mean(solve(params, polarize(g, center)), phi)
        extra["b"] = center.b
    chain = [mid - lhs, rhs - mid]
    extra["mid"] = mid
    extra["chain_slacks"] = chain
    same = g.same_as(gs)
    rep = _report(
        "sdr_convex", lhs, rhs, same if _strictly_increasing(phi) else None, tolerances,
        f"phi={_phi_desc(phi)} alpha={params.alpha!r} chain={chain[0]:.3e},{chain[1]:.3e}",
        extra,
    )
    if min(chain) < -tol:
        rep = CheckReport(rep.name, rep.lhs, rep.rhs, rep.slack, VIOLATED,
                          rep.equality_expected, rep.detail + " (chain broken)", rep.extra)
    return rep


def check_lp_monotonicity(
    f: GridFunction, params: RobinParams, p_list: Sequence[float], tolerances=None
) -> list:
    """L^p norms of u_f, u_{f_H} (greedy b) and u_{f#}, one report per p."""
    g = refine_for_sdr(f)
    gs = sdr(g)
    u = solve(params, g)
    us = solve(params, gs)
    center = greedy_center(g, gs)
    um = solve(params, polarize(g, center)) if center is not None else u
    same = g.same_as(gs)
    out = []
    for p in p_list:
        p = float(p)
        if not p >= 1:
            raise ValueError(f"p must be >= 1 or inf, got {p}")
        name = f"lp_monotonicity:p={p:g}"
        a, m, c = u.lp_norm(p), um.lp_norm(p), us.lp_norm(p)
        tol = tolerance(name, tolerances)
        rep = _report(
            name, a, c, same, tolerances,
            f"p={p:g} alpha={params.alpha!r} mid={m!r}",
            {"p": p, "mid": m, "b": None if center is None else center.b,
             "chain_slacks": [m - a, c - m]},
        )
        if min(m - a, c - m) < -tol:
            rep = CheckReport(rep.name, rep.lhs, rep.rhs, rep.slack, VIOLATED,
                              rep.equality_expected, rep.detail + " (chain broken)", rep.extra)
        out.append(rep)
    return out


def check_max_comparison(f: GridFunction, params: RobinParams, tolerances=None) -> CheckReport:
    """max u_f against u_{f#}(0); also confirms that u_{f#} peaks at 0."""
    g = refine_for_sdr(f)
    gs = sdr(g)
    u = solve(params, g)
    us = solve(params, gs)
    peak = argmax_least_abs(us)
    at_zero = us.at_zero()
    rep = _report(
        "max_comparison", u.max(), at_zero, g.same_as(gs), tolerances,
        f"alpha={params.alpha!r} argmax_sdr={peak!r}",
        {"alpha": params.alpha, "argmax_sdr": peak, "max_sdr": us.max(),
         "argmax_f": argmax_least_abs(u)},
    )
    if peak != 0.0 or us.max() - at_zero > tolerance("max_comparison", tolerances):
        rep = CheckReport(rep.name, rep.lhs, rep.rhs, rep.slack, VIOLATED,
                          rep.equality_expected, rep.detail + " (u_sdr does not peak at 0)", rep.extra)
    return rep


# -- product inequalities ------------------------------------------------------


def _product_integral(f: GridFunction, g: GridFunction) -> float:
    # fsum is exact up to one rounding, so permuted products give identical sums
    return f.grid.cell_width * math.fsum(f.values * g.values)


def check_hl_polarization(
    f: GridFunction, g: GridFunction, center: PolarizationCenter, tolerances=None
) -> CheckReport:
    eq_set = polarization_equality_set(f, g, center)
    return _report(
        "hl_polarization",
        _product_integral(f, g),
        _product_integral(polarize(f, center), polarize(g, center)),
        eq_set.measure == 0,
        tolerances,
        f"b={center.b!r} equality_set_measure={eq_set.measure!r}",
        {"b": center.b, "equality_set_measure": eq_set.measure,
         "witness_cells": list(eq_set.witness_cells)},
    )


def check_hl_sdr(f: GridFunction, g: GridFunction, tolerances=None) -> CheckReport:
    eq_set = sdr_equality_set(f, g)
    return _report(
        "hl_sdr",
        _product_integral(f, g),
        _product_integral(sdr(f), sdr(g)),
        eq_set.measure == 0,
        tolerances,
        f"equality_set_measure={eq_set.measure!r}",
        {"equality_set_measure": eq_set.measure, "violating_pairs": len(eq_set.witness_cells)},
    )


# -- majorization ---------------------------------------------------------------


class KaramataPreconditionError(ValueError):
    def __init__(self, clause: str, message: str):
        super().__init__(f"precondition ({clause}) violated: {message}")
        self.clause = clause


def check_karamata(xs, ys, phi, tolerances=None, precondition_tol: float = 0.0,
                   name: str = "karamata") -> CheckReport:
    """Sum of phi over ``xs`` against ``ys`` when ``ys`` weakly majorizes ``xs``.

    Raises :class:`KaramataPreconditionError` naming clause (a) ordering,
    (b) leading terms or (c) partial sums.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size == 0:
        raise ValueError("xs and ys must be non-empty 1-d sequences of equal length")
    eps = precondition_tol
    for label, v in (("xs", xs), ("ys", ys)):
        if np.any(np.diff(v) > eps):
            raise KaramataPreconditionError("a", f"{label} is not non-increasing")
    if xs[0] > ys[0] + eps:
        raise KaramataPreconditionError("b", f"x1={xs[0]!r} > y1={ys[0]!r}")
    px, py = np.cumsum(xs), np.cumsum(ys)
    bad = np.flatnonzero(px > py + eps * np.arange(1, xs.size + 1))
    if bad.size:
        k = int(bad[0]) + 1
        raise KaramataPreconditionError("c", f"partial sum {k}: {px[k - 1]!r} > {py[k - 1]!r}")
    lhs = math.fsum(np.atleast_1d(phi(xs)))
    rhs = math.fsum(np.atleast_1d(phi(ys)))
    expected = bool(np.array_equal(xs, ys)) if getattr(phi, "strictly_convex", False) else None
    return _report(name, lhs, rhs, expected, tolerances, f"phi={_phi_desc(phi)} n={xs.size}")


# -- kernel inequalities --------------------------------------------------------


def _reflection_interval(b: float):
    return (b, PI) if b > 0 else (-PI, b)


def _inside(x, lo, hi, slack=1e-12):
    return lo - slack <= x <= hi + slack


def check_green_pair_inequalities(params: RobinParams, b: float, x: float, y: float,
                                  tolerances=None) -> list:
    """Both two-point kernel inequalities for x, y on the far side of b.

    ``green_pair:source`` reflects the source point y, ``green_pair:target``
    reflects the evaluation point x. Each also records the reduced form
    b (y - b) >= 0 (resp. b (x - b) >= 0) and the identity
    lhs - rhs = -2 c b (y - b) that links the two.
    """
    if b == 0 or not -PI < b < PI:
        raise ValueError("b must lie in (-pi, 0) or (0, pi)")
    lo, hi = _reflection_interval(b)
    if not (_inside(x, lo, hi) and _inside(y, lo, hi)):
        raise ValueError(f"x and y must lie in [{lo!r}, {hi!r}]")
    xr, yr = 2 * b - x, 2 * b - y
    c = params.c_alpha
    G = lambda s, t: green(params, s, t)
    reports = []
    for name, lhs, rhs, moving in (
        ("green_pair:source", G(x, y) + G(xr, y), G(x, yr) + G(xr, yr), y),
        ("green_pair:target", G(x, y) + G(x, yr), G(xr, y) + G(xr, yr), x),
    ):
        reduced = b * (moving - b)
        identity_residual = (lhs - rhs) - (-2 * c * reduced)
        reports.append(_report(
            name, lhs, rhs, bool(moving == b), tolerances,
            f"b={b!r} x={x!r} y={y!r} alpha={params.alpha!r}",
            {"b": b, "x": x, "y": y, "alpha": params.alpha, "reduced": reduced,
             "identity_residual": identity_residual},
        ))
    return reports


def check_kernel_chain(params: RobinParams, x0: float, tolerances=None) -> CheckReport:
    """0 < G(x0,-pi) < G(0,+-pi) < G(x0,pi) <= G(x0,x0) < G(0,0) for x0 in (0, pi].

    The report's slack is the smallest link gap. Strict links must be
    positive in floating point; the single non-strict link may close only at
    x0 = pi. That link's exact gap is (pi - x0)(1 + c x0)/2; when it is
    positive but below the tolerance no equality claim is made.
    """
    if not 0 < x0 <= PI:
        raise ValueError("x0 must lie in (0, pi]")
    G = lambda s, t: green(params, s, t)
    chain = [0.0, G(x0, -PI), G(0, PI), G(x0, PI), G(x0, x0), G(0, 0)]
    gaps = np.diff(chain)
    strict = np.array([True, True, True, False, True])
    tol = tolerance("kernel_chain", tolerances)
    symmetric = G(0, -PI) == G(0, PI)
    loose_gap = float(gaps[3])
    verdict = classify(loose_gap, tol) if loose_gap <= tol else HOLDS
    if np.any(gaps < -tol) or np.any(gaps[strict] <= 0) or not symmetric:
        verdict = VIOLATED
    slack = float(gaps.min())
    exact_loose = (PI - x0) * (1 + params.c_alpha * x0) / 2
    expected = True if x0 == PI else (None if exact_loose <= tol else False)
    return CheckReport(
        "kernel_chain", 0.0, slack, slack, verdict, expected,
        f"x0={x0!r} alpha={params.alpha!r}",
        {"x0": x0, "alpha": params.alpha, "chain": chain, "gaps": gaps.tolist()},
    )


def check_green_sdr(params: RobinParams, x0: float, f: Optional[GridFunction] = None,
                    n_samples: int = 2001, tolerances=None) -> CheckReport:
    """G#(x0, .) <= G(0, .) on a sample of [-pi, pi], with equality iff x0 = 0.

    When ``f`` is given, also checks 0 < G#(x0, y) f#(y) at the cell midpoints
    strictly inside the support of f#.
    """
    gs = green_sdr_closed_form(params, x0)
    ys = np.union1d(np.linspace(-PI, PI, n_samples), gs.breakpoints)
    gap = green(params, 0.0, ys) - gs(ys)
    i = int(np.argmin(gap))
    extra = {"x0": x0, "alpha": params.alpha, "argmin_y": float(ys[i])}
    if f is not None:
        fs = sdr(refine_for_sdr(f))
        half = fs.support_measure() / 2
        mids = fs.grid.midpoints
        inside = np.abs(mids) < half
        prod = gs(mids[inside]) * fs.values[inside]
        extra["positive_inside_support"] = bool(np.all(prod > 0))
    rep = _report("green_sdr", gs(ys[i]), green(params, 0.0, ys[i]), bool(x0 == 0),
                  tolerances, f"x0={x0!r} alpha={params.alpha!r}", extra)
    if extra.get("positive_inside_support") is False:
        rep = CheckReport(rep.name, rep.lhs, rep.rhs, rep.slack, VIOLATED,
                          rep.equality_expected, rep.detail + " (non-positive product)", rep.extra)
    return rep


# -- pointwise comparisons of solutions ----------------------------------------


def _near_and_far(center: PolarizationCenter):
    """(far side I, 0 side) closed intervals for a center."""
    b = center.b
    if b > 0:
        return (b, PI), (-PI, b)
    return (-PI, b), (b, PI)


def check_solution_pair_inequalities(
    f: GridFunction, center: PolarizationCenter, params: RobinParams, x: float,
    tolerances=None,
) -> list:
    """Three pointwise comparisons of u_f and u_{f_H}:

    ``solution_pair:sum``        u_f(x) + u_f(x') <= u_fH(x) + u_fH(x')  for x in I
    ``solution_pair:reflected``  u_f(x) <= u_fH(x')                       for x in I
    ``solution_pair:pointwise``  u_f(x) <= u_fH(x)                        on the 0 side of b

    where I is the side of b away from 0 and x' = 2b - x. Clauses whose domain
    excludes x are reported as not applicable.
    """
    fh = polarize(f, center)
    same = f.same_as(fh)
    b = center.b
    (flo, fhi), (nlo, nhi) = _near_and_far(center)
    xr = 2 * b - x
    base = f"b={b!r} x={x!r} alpha={params.alpha!r}"
    extra = {"b": b, "x": x, "alpha": params.alpha}
    out = []
    if _inside(x, flo, fhi):
        uf = solution_at(params, f, np.array([x, xr]))
        uh = solution_at(params, fh, np.array([x, xr]))
        out.append(_report("solution_pair:sum", uf.sum(), uh.sum(),
                           same, tolerances, base, extra))
        out.append(_report("solution_pair:reflected", uf[0], uh[1],
                           None, tolerances, base, extra))
    else:
        out.append(_not_applicable("solution_pair:sum", base + " (x outside far side)"))
        out.append(_not_applicable("solution_pair:reflected", base + " (x outside far side)"))
    if _inside(x, nlo, nhi):
        out.append(_report("solution_pair:pointwise", solution_at(params, f, x),
                           solution_at(params, fh, x), same, tolerances, base, extra))
    else:
        out.append(_not_applicable("solution_pair:pointwise", base + " (x outside 0 side)"))
    return out


def check_karamata_phi_pair(
    f: GridFunction, center: PolarizationCenter, phi, params: RobinParams, x: float,
    tolerances=None,
) -> list:
    """phi-level versions of the pair comparisons.

    ``karamata_phi_pair:sum`` applies the two-term majorization check to
    (u_f(x), u_f(x')) against (u_fH(x), u_fH(x')) for x in I;
    ``karamata_phi_pair:pointwise`` compares phi(u_f(x)) with phi(u_fH(x)) on
    the 0 side of b.
    """
    fh = polarize(f, center)
    same = f.same_as(fh)
    b = center.b
    (flo, fhi), (nlo, nhi) = _near_and_far(center)
    base = f"b={b!r} x={x!r} phi={_phi_desc(phi)} alpha={params.alpha!r}"
    extra = {"b": b, "x": x, "phi": _phi_desc(phi), "alpha": params.alpha}
    expected = same if _strictly_increasing(phi) else None
    out = []
    if _inside(x, flo, fhi):
        pts = np.array([x, 2 * b - x])
        xs = np.sort(solution_at(params, f, pts))[::-1]
        ys = np.sort(solution_at(params, fh, pts))[::-1]
        tol = tolerance("karamata_phi_pair:sum", tolerances)
        k = check_karamata(xs, ys, phi, precondition_tol=tol, name="karamata_phi_pair:sum",
                           tolerances=tolerances)
        out.append(CheckReport(k.name, k.lhs, k.rhs, k.slack, k.verdict, expected,
                               base, dict(extra, xs=xs.tolist(), ys=ys.tolist())))
    else:
        out.append(_not_applicable("karamata_phi_pair:sum", base + " (x outside far side)"))
    if _inside(x, nlo, nhi):
        lhs = float(phi(np.array(solution_at(params, f, x))))
        rhs = float(phi(np.array(solution_at(params, fh, x))))
        out.append(_report("karamata_phi_pair:pointwise", lhs, rhs, expected, tolerances, base, extra))
    else:
        out.append(_not_applicable("karamata_phi_pair:pointwise", base + " (x outside 0 side)"))
    return out


# -- JSON lines -------------------------------------------------------------------


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _clean(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(w) for w in v]
    if isinstance(v, np.generic):
        return _clean(v.item())
    return v


def report_to_json(report: CheckReport, **context) -> str:
    d = dict(context)
    d.update(report.to_dict())
    return json.dumps(_clean(d), allow_nan=False)


def report_from_json(line: str) -> CheckReport:
    d = json.loads(line)
    for k in ("lhs", "rhs", "slack"):
        if d.get(k) is None:
            d[k] = float("nan")
        elif isinstance(d[k], str):
            d[k] = float(d[k])
    return CheckReport.from_dict(d)


def summarize(reports: Sequence[CheckReport]) -> dict:
    counts = {HOLDS: 0, EQUALITY: 0, VIOLATED: 0, NOT_APPLICABLE: 0}
    mismatches = 0
    worst = 0.0
    by_name: dict = {}
    for r in reports:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
        fam = r.name.split(":", 1)[0]
        by_name.setdefault(fam, {}).setdefault(r.verdict, 0)
        by_name[fam][r.verdict] += 1
        if r.equality_consistent is False:
            mismatches += 1
        if r.verdict == VIOLATED and math.isfinite(r.slack):
            worst = max(worst, -r.slack)
    return {
        "total": len(reports),
        "counts": counts,
        "equality_mismatches": mismatches,
        "max_violation": worst,
        "by_check": dict(sorted(by_name.items())),
    }
