"""Numerical checks of the standing assumptions behind the main results:
equi-continuity moduli, derivative infima along orbits, second-derivative
bounds, invariance of a subinterval, and the assembled per-theorem reports.

Quantifiers over all indices n are truncated: exact for constant/periodic
schedules (one period decides everything), evidence-only otherwise, in which
case the check is marked "sampled". Grid quantities are likewise evidence
unless the family pins its extremes on endpoints and critical points (all
polynomial families here do).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .core import Interval, MapSequence, Orbit, iterate_orbit
from .errors import ConfigError, RangeError, SmoothnessError
from .lyapunov import estimate_exponents

__all__ = [
    "PASS",
    "FAIL",
    "SAMPLED",
    "ModulusEstimate",
    "CheckResult",
    "HypothesisReport",
    "estimate_modulus",
    "derivative_modulus",
    "function_modulus",
    "compose_modulus",
    "derivative_infimum",
    "second_derivative_bound",
    "check_invariance",
    "check_theorem",
    "check_theorem31",
    "check_theorem32",
    "check_theorem41",
]

PASS = "pass"
FAIL = "fail"
SAMPLED = "sampled"

DEFAULT_EPSILONS = (0.5, 0.1, 0.02)
DEFAULT_INDEX_HORIZON = 256
MODULUS_GRID = 10_000


@dataclass(frozen=True)
class ModulusEstimate:
    """Table of (epsilon, delta) pairs: every sampled pair of arguments at
    distance below delta keeps the map values within epsilon, uniformly over
    the sampled indices. Deltas are quantized to the grid spacing."""

    table: tuple[tuple[float, float], ...]  # epsilon decreasing
    grid_spacing: float
    index_horizon: int
    exact_for_periodic: bool

    def delta_for(self, epsilon: float) -> float | None:
        """Conservative lookup: delta certified for the largest table
        epsilon not exceeding the query."""
        best = None
        for eps, delta in self.table:
            if eps <= epsilon and (best is None or eps > best[0]):
                best = (eps, delta)
        return best[1] if best else None


def estimate_modulus(values_fn, domain: Interval, epsilons,
                     grid_spacing: float | None = None,
                     index_count: int = DEFAULT_INDEX_HORIZON,
                     *, exact_for_periodic: bool = False) -> ModulusEstimate:
    """Largest grid-quantized delta per epsilon, uniformly over indices.

    ``values_fn(n, xs)`` evaluates the n-th map on a grid. For each epsilon
    the result is the largest m * spacing such that every sampled pair at
    distance below it differs by less than epsilon, found by binary search
    over the window length m (pair oscillation grows with m).
    """
    eps_sorted = sorted({float(e) for e in epsilons}, reverse=True)
    if not eps_sorted:
        raise ConfigError("epsilons must be nonempty")
    if eps_sorted[-1] <= 0.0:
        raise ConfigError("epsilons must be positive")
    if index_count < 1:
        raise ConfigError("index_count must be >= 1")
    spacing = domain.width / MODULUS_GRID if grid_spacing is None else float(grid_spacing)
    if spacing <= 0.0:
        raise ConfigError("grid_spacing must be positive")
    npts = max(2, int(round(domain.width / spacing)) + 1)
    xs = domain.grid(npts)
    h = domain.width / (npts - 1)
    values = np.empty((index_count, npts))
    for i in range(index_count):
        values[i] = values_fn(i, xs)

    def osc(m: int) -> float:
        # max over sampled pairs with index distance <= m-1
        if m <= 1:
            return 0.0
        wmax = maximum_filter1d(values, size=m, axis=1, mode="nearest")
        wmin = minimum_filter1d(values, size=m, axis=1, mode="nearest")
        return float((wmax - wmin).max())

    table = []
    hi_cap = npts
    for eps in eps_sorted:
        if osc(hi_cap) < eps:
            m = hi_cap
        else:
            lo_m, hi_m = 1, hi_cap  # osc(lo_m) < eps <= osc(hi_m)
            while hi_m - lo_m > 1:
                mid = (lo_m + hi_m) // 2
                if osc(mid) < eps:
                    lo_m = mid
                else:
                    hi_m = mid
            m = lo_m
        hi_cap = m  # smaller eps cannot admit a larger window
        table.append((eps, min(m * h, domain.width)))
    return ModulusEstimate(
        table=tuple(table), grid_spacing=h,
        index_horizon=index_count, exact_for_periodic=exact_for_periodic,
    )


def _index_count(seq: MapSequence, index_horizon: int) -> tuple[int, bool]:
    p = seq.index_period()
    if p is not None:
        return min(p, index_horizon), index_horizon >= p
    return index_horizon, False


def derivative_modulus(seq: MapSequence, epsilons=DEFAULT_EPSILONS,
                       grid_spacing: float | None = None,
                       index_horizon: int = DEFAULT_INDEX_HORIZON,
                       domain: Interval | None = None) -> ModulusEstimate:
    """Equi-continuity modulus of the derivative sequence {f_n'}."""
    count, exact = _index_count(seq, index_horizon)
    return estimate_modulus(
        seq.deriv1_array, domain or seq.domain, epsilons, grid_spacing,
        count, exact_for_periodic=exact,
    )


def function_modulus(fn, domain: Interval, epsilons,
                     grid_spacing: float | None = None) -> ModulusEstimate:
    """Uniform-continuity modulus of a single map on an interval."""
    return estimate_modulus(
        lambda _n, xs: fn(xs), domain, epsilons, grid_spacing, 1,
        exact_for_periodic=True,
    )


def compose_modulus(outer: ModulusEstimate, inner: ModulusEstimate,
                    *, range_covered: bool) -> ModulusEstimate:
    """Modulus for g o f_n from the moduli of g (outer) and {f_n} (inner).

    For each outer row (eps, d): arguments within inner.delta_for(d) keep
    f-values within d, hence g-values within eps. The caller must assert
    that g's domain covers the union of the f_n ranges.
    """
    if not range_covered:
        raise RangeError("outer modulus does not cover the inner maps' range")
    rows = []
    for eps, d_out in outer.table:
        d = inner.delta_for(d_out)
        if d is not None:
            rows.append((eps, d))
    if not rows:
        raise ConfigError("inner table certifies none of the outer epsilons")
    return ModulusEstimate(
        table=tuple(rows), grid_spacing=inner.grid_spacing,
        index_horizon=inner.index_horizon,
        exact_for_periodic=outer.exact_for_periodic and inner.exact_for_periodic,
    )


def derivative_infimum(seq: MapSequence, orbit: Orbit,
                       index_horizon: int = DEFAULT_INDEX_HORIZON) -> float:
    """min over sampled indices n and orbit points x_k of |f_n'(x_k)|.

    Exact over n for constant/periodic schedules; exact over k because the
    whole stored orbit is used.
    """
    count, _ = _index_count(seq, index_horizon)
    return float(min(
        float(np.abs(seq.deriv1_array(n, orbit.points)).min())
        for n in range(count)
    ))


def second_derivative_bound(seq: MapSequence, grid_spacing: float | None = None,
                            index_horizon: int = DEFAULT_INDEX_HORIZON) -> float:
    """max over a domain grid and sampled indices of |f_n''(x)|."""
    if seq.smoothness != "C2":
        raise SmoothnessError("second derivatives unavailable for a C1 sequence")
    dom = seq.domain
    spacing = dom.width / MODULUS_GRID if grid_spacing is None else float(grid_spacing)
    npts = max(2, int(round(dom.width / spacing)) + 1)
    xs = dom.grid(npts)
    count, _ = _index_count(seq, index_horizon)
    return float(max(
        float(np.abs(seq.deriv2_array(n, xs)).max())
        for n in range(count)
    ))


def check_invariance(seq: MapSequence, sub: Interval,
                     grid_spacing: float | None = None,
                     index_horizon: int = DEFAULT_INDEX_HORIZON) -> str:
    """Does every sampled f_n map the subinterval into itself?

    Returns "fail" on a counterexample, "pass" when the evidence is exact
    (periodic indices and image extremes pinned by endpoints plus critical
    points), "sampled" otherwise.
    """
    if sub.lo < seq.domain.lo or sub.hi > seq.domain.hi:
        raise ValueError("subinterval must lie within the domain")
    spacing = sub.width / MODULUS_GRID if grid_spacing is None else float(grid_spacing)
    npts = max(2, int(round(sub.width / spacing)) + 1)
    base = sub.grid(npts)
    count, index_exact = _index_count(seq, index_horizon)
    for n in range(count):
        crit = [c for c in seq.critical_points(n) if sub.contains(c)]
        pts = np.concatenate([base, np.array(crit)]) if crit else base
        img = seq.eval_array(n, pts)
        if img.min() < sub.lo or img.max() > sub.hi:
            return FAIL
    return PASS if index_exact and seq.image_extremes_on_grid() else SAMPLED


# ---------------------------------------------------------------------------
# Assembled reports


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass / fail / sampled
    value: float | None


@dataclass(frozen=True)
class HypothesisReport:
    theorem: str
    checks: tuple[CheckResult, ...]
    overall: str
    suggested_delta: float | None = None


def _overall(checks) -> str:
    statuses = [c.status for c in checks]
    if FAIL in statuses:
        return FAIL
    if all(s == PASS for s in statuses):
        return PASS
    return SAMPLED


def _is_fixed_point_orbit(orbit: Orbit, x0: float) -> bool:
    return bool((orbit.points == x0).all())


def check_theorem31(seq: MapSequence, x0: float, *, horizon: int = 10_000,
                    tail_fraction: float = 0.5, epsilons=DEFAULT_EPSILONS,
                    grid_spacing: float | None = None,
                    index_horizon: int = DEFAULT_INDEX_HORIZON) -> HypothesisReport:
    """Positive-exponent sensitivity hypotheses at x0: equi-continuous
    derivatives, derivative infimum M > 0 along the orbit, exponent > 0.

    The report carries a suggested sensitivity threshold derived from the
    modulus at epsilon = M/2 (the scale at which derivatives stay comparable
    across the orbit's neighborhood), capped at a twentieth of the domain.
    """
    orbit = iterate_orbit(seq, x0, horizon)
    fixed = _is_fixed_point_orbit(orbit, x0)
    cert_range = seq.fixed_point_log_deriv_range(x0) if fixed else None
    period_exact = seq.index_period() is not None and index_horizon >= seq.index_period()

    mod = derivative_modulus(seq, epsilons, grid_spacing, index_horizon)
    c_mod = CheckResult(
        "deriv1_equicontinuous",
        PASS if mod.exact_for_periodic else SAMPLED,
        min(d for _, d in mod.table),
    )

    m = derivative_infimum(seq, orbit, index_horizon)
    if m > 0.0:
        certified = (fixed and period_exact) or (cert_range is not None and math.isfinite(cert_range[0]))
        inf_status = PASS if certified else SAMPLED
    else:
        inf_status = FAIL
    c_inf = CheckResult("derivative_infimum_positive", inf_status, m)

    est = estimate_exponents(orbit, tail_fraction)
    if est.upper > 0.0:
        lam_status = PASS if (cert_range is not None and cert_range[0] > 0.0) else SAMPLED
    else:
        lam_status = FAIL
    c_lam = CheckResult("lyapunov_exponent_positive", lam_status, est.upper)

    suggested = None
    if m > 0.0:
        count, exact = _index_count(seq, index_horizon)
        scale_mod = estimate_modulus(
            seq.deriv1_array, seq.domain, [m / 2.0], grid_spacing, count,
            exact_for_periodic=exact,
        )
        suggested = min(scale_mod.table[0][1] / 2.0, seq.domain.width / 20.0)

    checks = (c_mod, c_inf, c_lam)
    return HypothesisReport("T31", checks, _overall(checks), suggested)


def check_theorem32(seq: MapSequence, invariant_set: Interval, sample_points, *,
                    horizon: int = 10_000, tail_fraction: float = 0.5,
                    epsilons=DEFAULT_EPSILONS, grid_spacing: float | None = None,
                    index_horizon: int = DEFAULT_INDEX_HORIZON) -> HypothesisReport:
    """Set-wise sensitivity hypotheses: invariance of the subinterval,
    equi-continuous derivatives on it, a uniform derivative lower bound, and
    a positive exponent infimum over the sampled points.

    The exponent infimum over an uncountable set is sampled at finitely many
    points only, so that check is never better than "sampled".
    """
    points = tuple(float(x) for x in sample_points)
    if not points:
        raise ConfigError("sample_points must be nonempty")
    if not all(invariant_set.contains(x) for x in points):
        raise ConfigError("every sample point must lie in the invariant set")

    inv_status = check_invariance(seq, invariant_set, grid_spacing, index_horizon)
    c_inv = CheckResult("subinterval_invariant", inv_status, None)

    mod = derivative_modulus(seq, epsilons, grid_spacing, index_horizon,
                             domain=invariant_set)
    c_mod = CheckResult(
        "deriv1_equicontinuous_on_set",
        PASS if mod.exact_for_periodic else SAMPLED,
        min(d for _, d in mod.table),
    )

    count, index_exact = _index_count(seq, index_horizon)
    spacing = invariant_set.width / MODULUS_GRID if grid_spacing is None else float(grid_spacing)
    npts = max(2, int(round(invariant_set.width / spacing)) + 1)
    base = invariant_set.grid(npts)
    m = math.inf
    for n in range(count):
        crit = [c for c in seq.critical_points(n) if invariant_set.contains(c)]
        pts = np.concatenate([base, np.array(crit)]) if crit else base
        m = min(m, float(np.abs(seq.deriv1_array(n, pts)).min()))
    if m > 0.0:
        bound_status = PASS if index_exact and seq.image_extremes_on_grid() else SAMPLED
    else:
        bound_status = FAIL
    c_bound = CheckResult("derivative_lower_bound_on_set", bound_status, m)

    lam_inf = math.inf
    for x in points:
        est = estimate_exponents(iterate_orbit(seq, x, horizon), tail_fraction)
        lam_inf = min(lam_inf, est.upper)
    c_lam = CheckResult(
        "exponent_infimum_positive",
        SAMPLED if lam_inf > 0.0 else FAIL,
        lam_inf,
    )

    checks = (c_inv, c_mod, c_bound, c_lam)
    return HypothesisReport("T32", checks, _overall(checks))


def check_theorem41(seq: MapSequence, x0: float, *, horizon: int = 1 << 14,
                    tail_fraction: float = 0.5, grid_spacing: float | None = None,
                    index_horizon: int = DEFAULT_INDEX_HORIZON) -> HypothesisReport:
    """Exponential-stability hypotheses at x0: C2 smoothness, uniformly
    bounded second derivatives, finite negative exponent, and the gap
    2 lambda < lambda_0."""
    if seq.smoothness != "C2":
        checks = (CheckResult("second_deriv_available", FAIL, None),)
        return HypothesisReport("T41", checks, FAIL)
    c_smooth = CheckResult("second_deriv_available", PASS, None)

    m2 = second_derivative_bound(seq, grid_spacing, index_horizon)
    _, index_exact = _index_count(seq, index_horizon)
    m2_certified = seq.second_derivative_sup_certified() is not None or index_exact
    c_m2 = CheckResult("second_deriv_uniformly_bounded",
                       PASS if m2_certified else SAMPLED, m2)

    orbit = iterate_orbit(seq, x0, horizon)
    fixed = _is_fixed_point_orbit(orbit, x0)
    cert_range = seq.fixed_point_log_deriv_range(x0) if fixed else None
    est = estimate_exponents(orbit, tail_fraction)

    if est.sentinel or not (-math.inf < est.upper < 0.0):
        neg_status = FAIL
    elif cert_range is not None and math.isfinite(cert_range[0]) and cert_range[1] < 0.0:
        neg_status = PASS
    else:
        neg_status = SAMPLED
    c_neg = CheckResult("exponent_finite_negative", neg_status, est.upper)

    if est.sentinel or not 2.0 * est.upper < est.lower:
        gap_status = FAIL
    elif cert_range is not None and 2.0 * cert_range[1] < cert_range[0]:
        gap_status = PASS
    else:
        gap_status = SAMPLED
    c_gap = CheckResult("exponent_gap_2upper_below_lower", gap_status,
                        est.lower - 2.0 * est.upper)

    checks = (c_smooth, c_m2, c_neg, c_gap)
    return HypothesisReport("T41", checks, _overall(checks))


def check_theorem(seq: MapSequence, which: str, *, x0: float | None = None,
                  invariant_set: Interval | None = None, sample_points=None,
                  **options) -> HypothesisReport:
    """Dispatch to the per-theorem checker; raises ConfigError on a bad
    selector or missing target."""
    which = which.upper()
    if which == "T31":
        if x0 is None:
            raise ConfigError("T31 needs x0")
        return check_theorem31(seq, x0, **options)
    if which == "T32":
        if invariant_set is None or sample_points is None:
            raise ConfigError("T32 needs invariant_set and sample_points")
        return check_theorem32(seq, invariant_set, sample_points, **options)
    if which == "T41":
        if x0 is None:
            raise ConfigError("T41 needs x0")
        return check_theorem41(seq, x0, **options)
    raise ConfigError(f"unknown theorem selector {which!r} (one of T31, T32, T41)")
