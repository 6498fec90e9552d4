"""Sensitivity probing: separations, verdicts, replay exactness."""

import math

import numpy as np
import pytest

import nads_lab as nl
from nads_lab.core import Interval
from nads_lab.errors import ConfigError, PreconditionError
from nads_lab.hypotheses import check_theorem31
from nads_lab.sensitivity import (
    NOT_DETECTED,
    STRONGLY_SENSITIVE,
    UNDETERMINED,
    probe_points,
    probe_separation,
    sensitivity_in_set_test,
    shift_sensitivity_check,
    strong_sensitivity_test,
)


def test_probe_separation_affine_contraction():
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    seps = probe_separation(seq, 0.0, 0.1, 3)
    assert seps.tolist() == [0.1, 0.05, 0.025, 0.0125]


def test_probe_separation_logistic_hand_iteration():
    seq = nl.logistic(nl.Constant(4.0))
    seps = probe_separation(seq, 0.0, 0.25, 2)
    assert seps.tolist() == [0.25, 0.75, 0.75]  # w1 = 4 * 0.25 * 0.75


def test_probe_separation_small_gap_linearization():
    seq = nl.logistic(nl.Constant(2.0))
    y0 = 1e-6
    seps = probe_separation(seq, 0.0, y0, 1)
    w1 = 2.0 * y0 * (1.0 - y0)
    assert abs(seps[1] - w1) <= 1e-10 * w1


def test_probe_separation_requires_distinct_points():
    seq = nl.logistic(nl.Constant(2.0))
    with pytest.raises(ValueError):
        probe_separation(seq, 0.3, 0.3, 5)


def test_probe_points_one_sided_at_endpoint():
    pts = probe_points(0.0, 1e-3, 16, Interval(0.0, 1.0))
    assert len(pts) == 8
    assert pts == tuple(1e-3 * 2.0 ** (-j) for j in range(8))


def test_probe_points_two_sided_in_interior():
    pts = probe_points(0.5, 1e-2, 8, Interval(0.0, 1.0))
    assert len(pts) == 8
    assert set(pts) == {0.5 + 1e-2 * 2.0 ** (-j) for j in range(4)} | \
        {0.5 - 1e-2 * 2.0 ** (-j) for j in range(4)}


def test_probe_points_all_coincident_is_config_error():
    # sub-ulp radius: every candidate rounds back onto x0
    with pytest.raises(ConfigError):
        probe_points(1.0, 1e-18, 16, Interval(0.0, 1.0))


def test_strong_sensitivity_periodic_234():
    seq = nl.logistic(nl.Periodic([2.0, 3.0, 4.0]))
    report = strong_sensitivity_test(seq, 0.0, delta=0.1, radius=1e-3,
                                     probe_count=16, horizon=10_000)
    assert report.verdict == STRONGLY_SENSITIVE
    assert all(p.escape_time is not None for p in report.probes)


def test_strong_sensitivity_contraction_not_detected():
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    report = strong_sensitivity_test(seq, 0.0, delta=0.01, radius=1e-3,
                                     probe_count=16, horizon=500)
    assert report.verdict == NOT_DETECTED
    assert all(p.escape_time is None for p in report.probes)


def test_strong_sensitivity_stable_logistic_not_detected():
    seq = nl.logistic(nl.Constant(0.6))
    report = strong_sensitivity_test(seq, 0.0, delta=0.01, radius=1e-3,
                                     probe_count=16, horizon=10_000)
    assert report.verdict == NOT_DETECTED


def test_strong_sensitivity_undetermined_when_growth_is_slow():
    # r = 1.2: separations from 0 grow toward the fixed point 1 - 1/r but
    # stay far below delta over a short horizon
    seq = nl.logistic(nl.Constant(1.2))
    report = strong_sensitivity_test(seq, 0.0, delta=0.5, radius=1e-3,
                                     probe_count=16, horizon=40)
    assert report.verdict == UNDETERMINED


def test_verdict_soundness_recompute_escapes():
    seq = nl.logistic(nl.Periodic([2.0, 3.0, 4.0]))
    report = strong_sensitivity_test(seq, 0.0, delta=0.1, radius=1e-3,
                                     probe_count=16, horizon=2000)
    assert report.verdict == STRONGLY_SENSITIVE
    for probe in report.probes:
        seps = probe_separation(seq, report.x0, probe.y0, report.horizon)
        assert seps[probe.escape_time] > report.delta
        assert probe.max_separation == seps.max()


def test_monotone_escape_bound_for_expanding_affine():
    # expanding slopes cannot be self-maps of a bounded interval, so skip
    # the constructor check and give the domain enough headroom that every
    # probe escapes delta well before the trajectory could leave
    c = 1.5
    seq = nl.affine(nl.Constant(c), nl.Constant(0.0), Interval(0.0, 1e9),
                    validate=False)
    delta = 0.1
    report = strong_sensitivity_test(seq, 0.0, delta=delta, radius=1e-3,
                                     probe_count=16, horizon=30)
    assert report.verdict == STRONGLY_SENSITIVE
    for probe in report.probes:
        bound = math.ceil(math.log(delta / probe.initial_gap) / math.log(c)) + 1
        assert probe.escape_time <= bound


def test_set_test_r4_classical_chaos():
    seq = nl.logistic(nl.Constant(4.0))
    agg = sensitivity_in_set_test(seq, [0.0, 0.13, 0.77], delta=0.05,
                                  radius=1e-3, probe_count=16, horizon=10_000)
    assert agg.verdict == STRONGLY_SENSITIVE


def test_set_test_contraction():
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    agg = sensitivity_in_set_test(seq, [0.1, 0.5], delta=0.01, radius=1e-3,
                                  probe_count=16, horizon=200)
    assert agg.verdict == NOT_DETECTED


def test_set_test_singleton_reduces_to_point_test():
    seq = nl.logistic(nl.Periodic([2.0, 3.0, 4.0]))
    agg = sensitivity_in_set_test(seq, [0.0], delta=0.1, radius=1e-3,
                                  probe_count=16, horizon=5000)
    point = strong_sensitivity_test(seq, 0.0, 0.1, 1e-3, 16, 5000)
    assert agg.verdict == point.verdict == STRONGLY_SENSITIVE
    assert agg.reports[0] == point


def test_shift_replay_is_bitwise_exact():
    seq = nl.logistic(nl.Periodic([2.0, 3.0, 4.0]))
    report = strong_sensitivity_test(seq, 0.0, delta=0.1, radius=1e-3,
                                     probe_count=16, horizon=5000)
    for k in (1, 2, 5):
        assert shift_sensitivity_check(seq, 0.0, k, report)


def test_shift_replay_single_remaining_step():
    seq = nl.logistic(nl.Periodic([2.0, 3.0, 4.0]))
    report = strong_sensitivity_test(seq, 0.0, delta=0.1, radius=1e-3,
                                     probe_count=16, horizon=5000)
    k = min(p.escape_time for p in report.probes) - 1
    assert k >= 1
    assert shift_sensitivity_check(seq, 0.0, k, report)


def test_shift_replay_needs_late_escape():
    seq = nl.logistic(nl.Periodic([2.0, 3.0, 4.0]))
    report = strong_sensitivity_test(seq, 0.0, delta=0.1, radius=1e-3,
                                     probe_count=16, horizon=5000)
    too_late = max(p.escape_time for p in report.probes)
    with pytest.raises(PreconditionError):
        shift_sensitivity_check(seq, 0.0, too_late, report)


def test_theorem31_consistency_with_sensitivity():
    # wherever the sensitivity hypotheses hold with a clearly positive
    # exponent, probing at the suggested threshold must detect it
    for params in (nl.Periodic([2.0, 3.0, 4.0]), nl.Constant(4.0),
                   nl.Periodic([2.0, 3.0])):
        seq = nl.logistic(params)
        report = check_theorem31(seq, 0.0, horizon=2000)
        assert report.overall != "fail"
        exponent = next(c.value for c in report.checks
                        if c.name == "lyapunov_exponent_positive")
        if exponent > 0.05:
            sens = strong_sensitivity_test(seq, 0.0, report.suggested_delta,
                                           radius=1e-3, probe_count=16,
                                           horizon=10_000)
            assert sens.verdict == STRONGLY_SENSITIVE
