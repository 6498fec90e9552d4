"""Empirical sensitivity testing.

Strong sensitivity at x0 demands that EVERY nearby start separates from the
x0 orbit beyond some threshold delta. A finite program samples the
neighborhood: probes are placed at geometrically shrinking gaps on both
sides of x0, so every length scale down to radius * 2^(1 - probe_count/2)
is represented. Absence of an escape within a finite horizon cannot refute
sensitivity, hence the three-way verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Interval, MapSequence, iterate_orbit, shift_system
from .errors import ConfigError, DomainError, PreconditionError

__all__ = [
    "STRONGLY_SENSITIVE",
    "NOT_DETECTED",
    "UNDETERMINED",
    "ProbeResult",
    "SensitivityReport",
    "SetSensitivityReport",
    "default_delta",
    "probe_points",
    "probe_separation",
    "strong_sensitivity_test",
    "sensitivity_in_set_test",
    "shift_sensitivity_check",
]

STRONGLY_SENSITIVE = "StronglySensitive"
NOT_DETECTED = "NotDetected"
UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of one probe trajectory against the base orbit."""

    y0: float
    initial_gap: float
    escape_time: int | None  # least n >= 1 with separation > delta
    max_separation: float


@dataclass(frozen=True)
class SensitivityReport:
    x0: float
    delta: float
    radius: float
    probes: tuple[ProbeResult, ...]
    horizon: int
    verdict: str


@dataclass(frozen=True)
class SetSensitivityReport:
    """Point-wise reports plus the aggregate verdict for a sampled set."""

    sample_points: tuple[float, ...]
    delta: float
    reports: tuple[SensitivityReport, ...]
    verdict: str


def default_delta(domain: Interval) -> float:
    """Default separation threshold: one twentieth of the domain width."""
    return domain.width / 20.0


def probe_separation(seq: MapSequence, x0: float, y0: float, horizon: int) -> np.ndarray:
    """|y_n - x_n| for n = 0..horizon from the two exactly-iterated orbits."""
    if x0 == y0:
        raise ValueError("probe must differ from the base point")
    ox = iterate_orbit(seq, x0, horizon)
    oy = iterate_orbit(seq, y0, horizon)
    return np.abs(oy.points - ox.points)


def probe_points(x0: float, radius: float, probe_count: int, domain: Interval) -> tuple[float, ...]:
    """Probes x0 +- radius * 2^-j, clamped to the domain, skipping x0 itself.

    At a domain endpoint only the inward side survives clamping, so the probe
    set is one-sided there.
    """
    pts: list[float] = []
    seen: set[float] = set()
    for j in range(probe_count // 2):
        gap = radius * 2.0 ** (-j)
        for y in (x0 + gap, x0 - gap):
            y = domain.clamp(y)
            if y != x0 and y not in seen:
                seen.add(y)
                pts.append(y)
    if not pts:
        raise ConfigError("every probe clamps onto x0; widen the radius or move x0")
    return tuple(pts)


def strong_sensitivity_test(seq: MapSequence, x0: float, delta: float, radius: float,
                            probe_count: int = 16, horizon: int = 10_000) -> SensitivityReport:
    """Probe a neighborhood of x0 for separation beyond delta.

    Verdict: StronglySensitive when every probe escapes; Undetermined when
    some probe has not escaped but its separations are still growing at the
    horizon (last-quartile max above first-quartile max); NotDetected
    otherwise.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if probe_count < 8:
        raise ValueError(f"probe_count must be >= 8, got {probe_count}")
    if not seq.domain.contains(x0):
        raise DomainError(f"x0={x0} is outside the domain")
    base = iterate_orbit(seq, x0, horizon)
    quart = max(1, (horizon + 1) // 4)
    probes: list[ProbeResult] = []
    still_growing = False
    for y0 in probe_points(x0, radius, probe_count, seq.domain):
        orb = iterate_orbit(seq, y0, horizon)
        seps = np.abs(orb.points - base.points)
        beyond = np.nonzero(seps[1:] > delta)[0]
        escape = int(beyond[0]) + 1 if beyond.size else None
        if escape is None and seps[-quart:].max() > seps[:quart].max():
            still_growing = True
        probes.append(ProbeResult(
            y0=float(y0),
            initial_gap=abs(float(y0) - x0),
            escape_time=escape,
            max_separation=float(seps.max()),
        ))
    if all(p.escape_time is not None for p in probes):
        verdict = STRONGLY_SENSITIVE
    elif still_growing:
        verdict = UNDETERMINED
    else:
        verdict = NOT_DETECTED
    return SensitivityReport(
        x0=float(x0), delta=float(delta), radius=float(radius),
        probes=tuple(probes), horizon=int(horizon), verdict=verdict,
    )


def sensitivity_in_set_test(seq: MapSequence, sample_points, delta: float, radius: float,
                            probe_count: int = 16, horizon: int = 10_000) -> SetSensitivityReport:
    """Run the point test at every sample with one shared delta.

    Aggregate verdict is StronglySensitive only if every point passes with
    that same constant; a single NotDetected point settles the aggregate.
    """
    points = tuple(float(x) for x in sample_points)
    if not points:
        raise ValueError("sample_points must be nonempty")
    reports = tuple(
        strong_sensitivity_test(seq, x, delta, radius, probe_count, horizon)
        for x in points
    )
    verdicts = [r.verdict for r in reports]
    if all(v == STRONGLY_SENSITIVE for v in verdicts):
        verdict = STRONGLY_SENSITIVE
    elif NOT_DETECTED in verdicts:
        verdict = NOT_DETECTED
    else:
        verdict = UNDETERMINED
    return SetSensitivityReport(points, float(delta), reports, verdict)


def shift_sensitivity_check(seq: MapSequence, x0: float, k: int,
                            report: SensitivityReport) -> bool:
    """Replay every escaping probe through the k-shifted system.

    Starting the shifted system from (x_k, y_k) performs the same float
    operations in the same order as steps k..N of the original run, so the
    separation at step N-k must match the original separation at step N
    bitwise, and must still exceed delta. Returns True when every eligible
    probe passes both checks.
    """
    if k < 1:
        raise ValueError(f"shift must be a positive integer, got {k}")
    eligible = [p for p in report.probes
                if p.escape_time is not None and p.escape_time > k]
    if not eligible:
        raise PreconditionError(f"no probe escapes after step k={k}")
    shifted = shift_system(seq, k)
    base = iterate_orbit(seq, x0, report.horizon)
    for probe in eligible:
        n_esc = probe.escape_time
        orb_y = iterate_orbit(seq, probe.y0, report.horizon)
        sep_orig = abs(float(orb_y.points[n_esc]) - float(base.points[n_esc]))
        replay_x = iterate_orbit(shifted, float(base.points[k]), n_esc - k)
        replay_y = iterate_orbit(shifted, float(orb_y.points[k]), n_esc - k)
        sep_shift = abs(float(replay_y.points[n_esc - k]) - float(replay_x.points[n_esc - k]))
        if sep_shift != sep_orig or not sep_shift > report.delta:
            return False
    return True
