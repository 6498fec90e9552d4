"""Gronwall bounds, certificates, envelope constants and verification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nads_lab as nl
from nads_lab.core import Interval
from nads_lab.errors import (
    EmptyInputError,
    HypothesisError,
    NegativeInputError,
    SmoothnessError,
)
from nads_lab.stability import (
    build_certificate,
    certify_exponential_stability,
    compute_c0,
    discrete_gronwall_bound,
    fit_envelope,
    lyapunov_stability_test,
    verify_envelope,
)


def gronwall_equality_recursion(b, mu):
    """Oracle: z_0 = B, z_n = B + sum_{k<=n} mu_k z_{k-1} (hypothesis with
    equality), computed literally."""
    z = [b]
    acc = 0.0
    for k in range(len(mu)):
        acc += mu[k] * z[k]
        z.append(b + acc)
    return np.array(z)


def c0_brute_force(orbit, lam, lambda_upper, lambda_lower, epsilon0, horizon):
    """Oracle: grow each ratio |a_{n-1}...a_k| / exp(lam (n-k) + l_k)
    multiplicatively, one factor |a_i| exp(-lam) at a time."""
    diffs = np.diff(orbit.log_deriv_sums[: horizon + 1])
    a_abs = np.exp(diffs)  # |a_i| recovered from the stored increments
    c = lambda_upper - lambda_lower + 2.0 * epsilon0
    step = math.exp(-lam)
    best = 1.0
    for k in range(horizon + 1):
        ratio = math.exp(-(k * c))
        best = max(best, ratio)
        for n in range(k + 1, horizon + 1):
            ratio = ratio * (a_abs[n - 1] * step)
            best = max(best, ratio)
    return best


# -- discrete Gronwall -------------------------------------------------------


def test_gronwall_zero_growth():
    assert discrete_gronwall_bound(5.0, [0.0] * 10).tolist() == [5.0] * 11


def test_gronwall_unit_growth():
    out = discrete_gronwall_bound(1.0, [1.0] * 3)
    assert out == pytest.approx([1.0, math.e, math.e**2, math.e**3], rel=1e-15)


def test_gronwall_dominates_saturating_recursion():
    # z_n = 1 + sum z_{k-1} doubles each step; 2^n <= e^n
    z = gronwall_equality_recursion(1.0, [1.0] * 40)
    assert z.tolist() == [float(2**n) for n in range(41)]
    bound = discrete_gronwall_bound(1.0, [1.0] * 40)
    assert (z <= bound).all()


def test_gronwall_rejects_negative_inputs():
    with pytest.raises(NegativeInputError):
        discrete_gronwall_bound(-1.0, [0.0])
    with pytest.raises(NegativeInputError):
        discrete_gronwall_bound(1.0, [0.5, -0.1])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 64))
def test_gronwall_dominates_random_equality_instances(seed, n):
    rng = np.random.default_rng(seed)
    b = float(rng.uniform(0.0, 10.0))
    mu = rng.uniform(0.0, 1.0, size=n)
    z = gronwall_equality_recursion(b, mu)
    bound = discrete_gronwall_bound(b, mu)
    assert (z <= bound + 4.0 * np.spacing(bound)).all()


# -- Lyapunov stability test --------------------------------------------------


def test_stability_affine_contraction_passes():
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    res = lyapunov_stability_test(seq, 0.0, eta=0.1, gaps=[0.05, 0.01], horizon=200)
    assert res.passed
    assert res.witness_gap == 0.05


def test_stability_chaotic_logistic_fails():
    seq = nl.logistic(nl.Constant(4.0))
    res = lyapunov_stability_test(seq, 0.0, eta=0.1, gaps=[0.05], horizon=100)
    assert not res.passed
    assert res.witness_gap is None


def test_stability_vacuous_for_eta_above_domain_width():
    seq = nl.logistic(nl.Constant(4.0))
    res = lyapunov_stability_test(seq, 0.0, eta=2.0, gaps=[0.05, 0.2], horizon=100)
    assert res.passed
    assert res.witness_gap == 0.2


# -- certificate construction --------------------------------------------------


def test_certificate_constant_06_closed_form():
    seq = nl.logistic(nl.Constant(0.6))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 1000))
    cert = build_certificate(seq, 0.0, eta=0.01, exponents=est)
    ln06 = math.log(0.6)
    assert cert.lambda_upper == pytest.approx(ln06, abs=1e-12)
    assert cert.lambda_lower == pytest.approx(ln06, abs=1e-12)
    assert cert.epsilon0 == pytest.approx(-ln06 / 6.0, abs=1e-12)
    assert cert.lam_tilde == pytest.approx(ln06 / 2.0, abs=1e-12)
    assert cert.second_deriv_bound == 1.2
    assert cert.c0 == 1.0
    # structural invariants
    assert cert.lam < 0.0 and cert.lam_tilde < 0.0
    assert cert.c0 >= 1.0 and cert.delta > 0.0 and cert.d_eta > 0.0
    assert cert.epsilon0 < (cert.lambda_lower - 2.0 * cert.lambda_upper) / 3.0


def test_certificate_internal_consistency_bitwise():
    seq = nl.logistic(nl.SeededUniform(0.5, 0.7, seed=3))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 4096))
    cert = build_certificate(seq, 0.0, eta=0.01, exponents=est)
    assert cert.recompute_d_eta() == cert.d_eta
    assert cert.recompute_delta() == cert.delta


def test_certificate_seeded_uniform_gate_passes():
    # bounds [0.5, 0.7]: 2 ln 0.7 = ln 0.49 < ln 0.5, so the gap holds
    seq = nl.logistic(nl.SeededUniform(0.5, 0.7, seed=1))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 4096))
    assert est.upper <= math.log(0.7) + 1e-6
    assert est.lower >= math.log(0.5) - 1e-6
    cert = build_certificate(seq, 0.0, eta=0.01, exponents=est)
    assert cert.delta > 0.0


def test_certificate_rejects_positive_exponent():
    seq = nl.logistic(nl.Constant(2.0))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 100))
    with pytest.raises(HypothesisError):
        build_certificate(seq, 0.0, eta=0.01, exponents=est)


def test_certificate_rejects_sentinel_exponent():
    seq = nl.logistic(nl.Constant(4.0))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.5, 100))
    with pytest.raises(HypothesisError):
        build_certificate(seq, 0.0, eta=0.01, exponents=est)


def test_certificate_rejects_c1_maps():
    class C1Affine(nl.MapSequence):
        def __init__(self):
            self.domain = Interval(0.0, 1.0)
            self.smoothness = "C1"

        def eval(self, n, x):
            return 0.5 * x

        def deriv1(self, n, x):
            return 0.5

    seq = C1Affine()
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.5, 100))
    with pytest.raises(SmoothnessError):
        build_certificate(seq, 0.0, eta=0.01, exponents=est)


def test_certificate_epsilon0_override_bounds():
    seq = nl.logistic(nl.Constant(0.6))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 1000))
    sup = (est.lower - 2.0 * est.upper) / 3.0
    with pytest.raises(HypothesisError):
        build_certificate(seq, 0.0, eta=0.01, exponents=est, epsilon0=sup)
    cert = build_certificate(seq, 0.0, eta=0.01, exponents=est, epsilon0=sup / 4)
    assert cert.epsilon0 == sup / 4


def test_corollary_converged_case():
    # converged estimates: certificate builds iff the common value is negative
    stable = nl.logistic(nl.Constant(0.6))
    est = nl.estimate_exponents(nl.iterate_orbit(stable, 0.0, 1000))
    assert est.converged
    assert build_certificate(stable, 0.0, 0.01, est).delta > 0.0
    unstable = nl.logistic(nl.Constant(2.0))
    est2 = nl.estimate_exponents(nl.iterate_orbit(unstable, 0.0, 1000))
    assert est2.converged
    with pytest.raises(HypothesisError):
        build_certificate(unstable, 0.0, 0.01, est2)


# -- C0 ------------------------------------------------------------------------


def test_c0_affine_contraction_is_one():
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    orbit = nl.iterate_orbit(seq, 0.9, 100)
    eps0 = 0.01
    lam = math.log(0.5) + eps0
    c0 = compute_c0(seq, orbit, lam, math.log(0.5), math.log(0.5), eps0, 100)
    assert c0 == 1.0
    assert c0_brute_force(orbit, lam, math.log(0.5), math.log(0.5), eps0, 100) == 1.0


def test_c0_logistic_constant_06_is_one():
    seq = nl.logistic(nl.Constant(0.6))
    orbit = nl.iterate_orbit(seq, 0.0, 200)
    ln06 = math.log(0.6)
    eps0 = -ln06 / 6.0
    c0 = compute_c0(seq, orbit, ln06 + eps0, ln06, ln06, eps0, 200)
    assert c0 == 1.0
    assert c0_brute_force(orbit, ln06 + eps0, ln06, ln06, eps0, 200) == \
        pytest.approx(1.0, rel=1e-12)


def test_c0_single_step_ratio_is_exp_minus_lk():
    # with an empty product the k = n ratios are exp(-l_k) <= 1
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    orbit = nl.iterate_orbit(seq, 0.5, 10)
    c0 = compute_c0(seq, orbit, lam=0.0, lambda_upper=0.0, lambda_lower=0.0,
                    epsilon0=0.35, horizon=10)
    # slopes 0.5 and lam = 0: products decay as 0.5^(n-k), all ratios <= 1
    assert c0 == 1.0


def test_c0_matches_brute_force_on_growing_products():
    # slopes above exp(lam): ratios grow, C0 exceeds 1
    seq = nl.affine(nl.Periodic([0.9, 0.6]), nl.Constant(0.0), Interval(0.0, 1.0))
    orbit = nl.iterate_orbit(seq, 0.8, 64)
    lam, u, l, eps0 = -0.4, -0.25, -0.45, 0.05
    fast = compute_c0(seq, orbit, lam, u, l, eps0, 64)
    slow = c0_brute_force(orbit, lam, u, l, eps0, 64)
    assert fast > 1.0
    assert fast == pytest.approx(slow, rel=1e-12)


def test_c0_rejects_zero_derivative():
    seq = nl.logistic(nl.Constant(4.0))
    orbit = nl.iterate_orbit(seq, 0.5, 50)
    with pytest.raises(HypothesisError):
        compute_c0(seq, orbit, -0.1, -0.2, -0.3, 0.01, 50)


# -- envelope verification ------------------------------------------------------


def test_verify_envelope_constant_06():
    seq = nl.logistic(nl.Constant(0.6))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 1000))
    cert = build_certificate(seq, 0.0, eta=0.01, exponents=est)
    ver = verify_envelope(seq, 0.0, cert, sample_count=1000, horizon=1000, seed=0)
    assert ver.passed
    assert ver.margin > 0.0


def test_verify_envelope_seeded_uniform():
    seq = nl.logistic(nl.SeededUniform(0.5, 0.7, seed=42))
    est = nl.estimate_exponents(nl.iterate_orbit(seq, 0.0, 1 << 14))
    cert = build_certificate(seq, 0.0, eta=0.01, exponents=est)
    ver = verify_envelope(seq, 0.0, cert, sample_count=1000, horizon=1000, seed=7)
    assert ver.passed and ver.margin > 0.0


def test_envelope_implies_lyapunov_stability():
    seq = nl.logistic(nl.SeededUniform(0.5, 0.7, seed=5))
    out = certify_exponential_stability(seq, 0.0, 0.01, estimate_horizon=4096, seed=9)
    assert out.verification.passed
    cert = out.certificate
    res = lyapunov_stability_test(seq, 0.0, eta=cert.eta,
                                  gaps=[cert.delta / 4, cert.delta / 2],
                                  horizon=1000)
    assert res.passed


def test_certify_outcome_records_estimates():
    seq = nl.logistic(nl.Constant(0.6))
    out = certify_exponential_stability(seq, 0.0, 0.01, estimate_horizon=1024, seed=1)
    assert out.verification.passed
    assert not out.retried and not out.indeterminate
    assert out.exponents.converged


# -- envelope fitting ------------------------------------------------------------


def test_fit_envelope_exact_geometric():
    fit = fit_envelope([0.1, 0.05, 0.025])
    assert fit.lambda_fit == pytest.approx(math.log(2.0), abs=1e-12)
    assert fit.c == 0.1
    assert fit.holds and fit.residual == 0.0


def test_fit_envelope_growth_step():
    fit = fit_envelope([0.1, 0.2, 0.1])
    assert fit.lambda_fit <= 0.0
    assert not fit.holds


def test_fit_envelope_rate_pinned_by_slowest_step():
    fit = fit_envelope([0.1, 0.09, 0.0001])
    assert fit.lambda_fit == pytest.approx(math.log(0.1 / 0.09), abs=1e-12)
    assert fit.lambda_fit == pytest.approx(0.10536, abs=1e-5)
    assert fit.holds


def test_fit_envelope_edge_cases():
    with pytest.raises(EmptyInputError):
        fit_envelope([])
    with pytest.raises(NegativeInputError):
        fit_envelope([0.1, -0.1])
    allzero = fit_envelope([0.0, 0.0])
    assert allzero.holds and allzero.lambda_fit == math.inf
    broken = fit_envelope([0.0, 0.5])
    assert not broken.holds


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(1e-9, 1e3), min_size=1, max_size=40))
def test_fit_envelope_bound_holds_at_fitted_rate(seps):
    fit = fit_envelope(seps)
    # by construction the fitted envelope dominates every separation
    assert fit.residual == 0.0
    if fit.lambda_fit > 0.0:
        assert fit.holds


def test_fit_envelope_on_real_affine_orbit():
    seq = nl.affine(nl.Constant(0.5), nl.Constant(0.0), Interval(0.0, 1.0))
    seps = nl.probe_separation(seq, 0.0, 0.25, 30)
    fit = fit_envelope(seps)
    assert fit.lambda_fit == pytest.approx(math.log(2.0), abs=1e-12)
    assert fit.holds
