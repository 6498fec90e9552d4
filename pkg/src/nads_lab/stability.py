"""Stability testing and exponential-stability certificates.

A certificate packages the explicit constants that turn negative exponent
estimates into a concrete decaying envelope: given upper/lower exponent
estimates u, l with u < 0 and 2u < l, a margin eps0 in (0, (l - 2u)/3),
the decay rate lam = u + eps0, the mixed rate lam_tilde = 2u - l + 3 eps0,
a uniform second-derivative bound M, and the envelope constant C0 of the
derivative products, the admissible initial gap is

    delta = C0^-1 exp(-D_eta) eta,
    D_eta = (1/2) M C0 eta exp(-2 lam) exp(lam_tilde) / (1 - exp(lam_tilde)),

and every start within delta of x0 obeys |y_n - x_n| <= eta exp(lam n).
``verify_envelope`` checks that bound empirically on sampled starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import MapSequence, Orbit, iterate_orbit
from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    HypothesisError,
    NegativeInputError,
    SmoothnessError,
)
from .lyapunov import ExponentEstimate, estimate_exponents

__all__ = [
    "StabilityCertificate",
    "EnvelopeFit",
    "EnvelopeVerification",
    "StabilityTestResult",
    "CertificationOutcome",
    "discrete_gronwall_bound",
    "lyapunov_stability_test",
    "build_certificate",
    "compute_c0",
    "verify_envelope",
    "fit_envelope",
    "certify_exponential_stability",
]


def _d_eta_formula(m: float, c0: float, eta: float, lam: float, lam_tilde: float) -> float:
    decay = math.exp(lam_tilde)
    return 0.5 * m * c0 * eta * math.exp(-2.0 * lam) * decay / (1.0 - decay)


def _delta_formula(c0: float, d_eta: float, eta: float) -> float:
    return (1.0 / c0) * math.exp(-d_eta) * eta


@dataclass(frozen=True)
class StabilityCertificate:
    """Explicit constants of an exponential-stability certificate at x0.

    ``lam`` is the (negative) envelope decay rate; ``delta`` the certified
    initial-gap radius; ``eta`` the envelope amplitude. Exponent fields are
    the finite-horizon estimates the certificate was derived from.
    """

    lambda_upper: float
    lambda_lower: float
    epsilon0: float
    lam: float
    lam_tilde: float
    second_deriv_bound: float
    c0: float
    eta: float
    d_eta: float
    delta: float

    def recompute_d_eta(self) -> float:
        return _d_eta_formula(self.second_deriv_bound, self.c0, self.eta,
                              self.lam, self.lam_tilde)

    def recompute_delta(self) -> float:
        return _delta_formula(self.c0, self.d_eta, self.eta)


@dataclass(frozen=True)
class EnvelopeFit:
    """Canonical one-parameter exponential envelope fitted to separations."""

    c: float
    lambda_fit: float
    residual: float
    holds: bool


@dataclass(frozen=True)
class EnvelopeVerification:
    passed: bool
    margin: float          # min over samples and steps of bound - |w_n|
    worst_y0: float
    worst_step: int
    sample_count: int
    horizon: int
    seed: int


@dataclass(frozen=True)
class StabilityTestResult:
    passed: bool
    witness_gap: float | None  # largest gap g with all gaps <= g passing
    rows: tuple[tuple[float, bool, float], ...]  # (gap, passed, sup separation)


@dataclass(frozen=True)
class CertificationOutcome:
    certificate: StabilityCertificate
    verification: EnvelopeVerification
    exponents: ExponentEstimate
    retried: bool
    indeterminate: bool


def discrete_gronwall_bound(b: float, mu, n: int | None = None) -> np.ndarray:
    """Bound sequence b_k = B exp(sum_{j<=k} mu_j), k = 0..n, with b_0 = B.

    Any nonnegative z satisfying z_k <= B + sum_{j<=k} mu_j z_{j-1} stays
    below this sequence.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if n is None:
        n = mu.size
    if n > mu.size:
        raise ValueError(f"need at least {n} growth coefficients, got {mu.size}")
    if b < 0.0:
        raise NegativeInputError(f"B must be nonnegative, got {b}")
    if n and mu[:n].min() < 0.0:
        raise NegativeInputError("growth coefficients must be nonnegative")
    out = np.empty(n + 1)
    out[0] = b
    if n:
        out[1:] = b * np.exp(np.cumsum(mu[:n]))
    return out


def lyapunov_stability_test(seq: MapSequence, x0: float, eta: float, gaps,
                            horizon: int = 1000) -> StabilityTestResult:
    """Check that starts within each gap of x0 stay within eta forever
    (empirically: over the horizon).

    Each gap probes x0 +- gap, keeping only the sides that land inside the
    domain; a gap with neither side inside is a DomainError. The witness is
    the largest tested gap below which every gap passed.
    """
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    gaps = sorted(float(g) for g in gaps)
    if not gaps or gaps[0] <= 0.0:
        raise ValueError("gaps must be a nonempty collection of positive reals")
    if not seq.domain.contains(x0):
        raise DomainError(f"x0={x0} is outside the domain")
    base = iterate_orbit(seq, x0, horizon)
    rows = []
    for gap in gaps:
        starts = [y for y in (x0 + gap, x0 - gap) if seq.domain.contains(y) and y != x0]
        if not starts:
            raise DomainError(f"gap {gap} puts both probes outside the domain")
        sup = max(
            float(np.abs(iterate_orbit(seq, y, horizon).points - base.points).max())
            for y in starts
        )
        rows.append((gap, sup <= eta, sup))
    witness = None
    for gap, ok, _ in rows:
        if not ok:
            break
        witness = gap
    return StabilityTestResult(
        passed=all(ok for _, ok, _ in rows),
        witness_gap=witness,
        rows=tuple(rows),
    )


def compute_c0(seq: MapSequence, orbit: Orbit, lam: float, lambda_upper: float,
               lambda_lower: float, epsilon0: float, horizon: int) -> float:
    """Minimal C0 >= 1 with |a_{n-1} ... a_k| <= C0 exp(lam (n-k) + l_k)
    over all 0 <= k <= n <= horizon, where a_i = f_i'(x_i) and
    l_k = k (lambda_upper - lambda_lower + 2 epsilon0).

    Computed in log space from the orbit's partial sums: with
    phi_n = S_n - lam n and psi_k = phi_k + c k, the log of the largest
    ratio is max_n (phi_n - min_{k<=n} psi_k), an O(horizon) scan.
    """
    if horizon > orbit.horizon:
        raise ValueError(f"horizon {horizon} exceeds orbit horizon {orbit.horizon}")
    p = orbit.log_deriv_sums[: horizon + 1]
    if np.isneginf(p).any():
        raise HypothesisError("a derivative vanishes on the orbit; products of |a_i| degenerate")
    idx = np.arange(horizon + 1, dtype=np.float64)
    c = lambda_upper - lambda_lower + 2.0 * epsilon0
    phi = p - lam * idx
    psi = phi + c * idx
    best = float(np.max(phi - np.minimum.accumulate(psi)))
    return max(1.0, math.exp(best))


def build_certificate(seq: MapSequence, x0: float, eta: float,
                      exponents: ExponentEstimate, horizon_c0: int = 1000,
                      *, epsilon0: float | None = None) -> StabilityCertificate:
    """Derive the certificate constants from exponent estimates.

    Gates: the upper estimate must be finite and negative and satisfy
    2 upper < lower; the maps must be C2. The default margin
    eps0 = (lower - 2 upper)/6 sits at the midpoint of the lower half of the
    admissible interval (0, (lower - 2 upper)/3); pass ``epsilon0`` to
    override, e.g. when retrying a failed verification with a smaller value.
    """
    from . import hypotheses

    if seq.smoothness != "C2":
        raise SmoothnessError("certificate needs second derivatives (C2 maps)")
    if eta <= 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    upper, lower = exponents.upper, exponents.lower
    if not (-math.inf < upper < 0.0):
        raise HypothesisError(
            f"upper exponent estimate must be finite and negative, got {upper}")
    if not 2.0 * upper < lower:
        raise HypothesisError(
            f"exponent gap fails: 2*upper = {2.0 * upper} must be below lower = {lower}")
    eps_sup = (lower - 2.0 * upper) / 3.0
    eps0 = (lower - 2.0 * upper) / 6.0 if epsilon0 is None else float(epsilon0)
    if not 0.0 < eps0 < eps_sup:
        raise HypothesisError(f"epsilon0 must lie in (0, {eps_sup}), got {eps0}")
    lam = upper + eps0
    lam_tilde = 2.0 * upper - lower + 3.0 * eps0
    m = seq.second_derivative_sup_certified()
    if m is None:
        m = hypotheses.second_derivative_bound(seq)
    orbit = iterate_orbit(seq, x0, horizon_c0)
    c0 = compute_c0(seq, orbit, lam, upper, lower, eps0, horizon_c0)
    d_eta = _d_eta_formula(m, c0, eta, lam, lam_tilde)
    delta = _delta_formula(c0, d_eta, eta)
    return StabilityCertificate(
        lambda_upper=upper, lambda_lower=lower, epsilon0=eps0,
        lam=lam, lam_tilde=lam_tilde, second_deriv_bound=m,
        c0=c0, eta=float(eta), d_eta=d_eta, delta=delta,
    )


def verify_envelope(seq: MapSequence, x0: float, cert: StabilityCertificate,
                    sample_count: int = 1000, horizon: int = 1000,
                    seed: int = 0) -> EnvelopeVerification:
    """Sample starts within delta of x0 and check |w_n| <= eta exp(lam n).

    Reports the minimum over samples and steps of (bound - |w_n|); the
    verdict passes when that margin is nonnegative.
    """
    if sample_count < 10:
        raise ValueError(f"sample_count must be >= 10, got {sample_count}")
    if not seq.domain.contains(x0):
        raise DomainError(f"x0={x0} is outside the domain")
    lo = max(seq.domain.lo, x0 - cert.delta)
    hi = min(seq.domain.hi, x0 + cert.delta)
    rng = np.random.default_rng(seed)
    ys = rng.uniform(lo, hi, size=sample_count)
    ys = ys[(ys != x0) & (np.abs(ys - x0) < cert.delta)]
    if ys.size == 0:
        raise ConfigError("no admissible starts inside the certified radius")
    base = iterate_orbit(seq, x0, horizon)
    steps = np.arange(horizon + 1, dtype=np.float64)
    bound = cert.eta * np.exp(cert.lam * steps)
    margin = math.inf
    worst_y0 = float(ys[0])
    worst_step = 0
    for y0 in ys:
        w = np.abs(iterate_orbit(seq, float(y0), horizon).points - base.points)
        gaps = bound - w
        i = int(np.argmin(gaps))
        if gaps[i] < margin:
            margin = float(gaps[i])
            worst_y0 = float(y0)
            worst_step = i
    return EnvelopeVerification(
        passed=margin >= 0.0, margin=margin, worst_y0=worst_y0,
        worst_step=worst_step, sample_count=int(ys.size),
        horizon=int(horizon), seed=int(seed),
    )


def fit_envelope(separations) -> EnvelopeFit:
    """Fit the canonical envelope |w_n| <= C exp(-rate n) with C = |w_0|.

    The rate is the largest one the data admits: min over n >= 1 of
    -ln(w_n / w_0) / n, with zero separations unconstraining. ``holds``
    requires a strictly positive rate (a genuinely decaying envelope).
    """
    w = np.asarray(separations, dtype=np.float64)
    if w.size == 0:
        raise EmptyInputError("separations must be nonempty")
    if w.min() < 0.0:
        raise NegativeInputError("separations must be nonnegative")
    w0 = float(w[0])
    if w0 == 0.0:
        if w.max() == 0.0:
            return EnvelopeFit(c=0.0, lambda_fit=math.inf, residual=0.0, holds=True)
        return EnvelopeFit(c=0.0, lambda_fit=-math.inf,
                           residual=float(w.max()), holds=False)
    rates = [
        -math.log(float(w[n]) / w0) / n
        for n in range(1, w.size)
        if w[n] != 0.0
    ]
    lambda_fit = min(rates) if rates else math.inf
    if math.isinf(lambda_fit):
        residual = 0.0  # every later separation is zero
    else:
        steps = np.arange(w.size, dtype=np.float64)
        bound = w0 * np.exp(-lambda_fit * steps)
        excess = w - bound
        # binding steps satisfy the bound with equality; the exp/log
        # round trip leaves dust that grows with the exponent magnitude,
        # so clamp a few ulp per step rather than a fixed count
        excess[excess <= (4.0 + 2.0 * steps) * np.spacing(bound)] = 0.0
        residual = max(0.0, float(excess.max()))
    holds = lambda_fit > 0.0 and residual == 0.0
    return EnvelopeFit(c=w0, lambda_fit=lambda_fit, residual=residual, holds=holds)


def certify_exponential_stability(seq: MapSequence, x0: float, eta: float, *,
                                  estimate_horizon: int = 1 << 14,
                                  tail_fraction: float = 0.5,
                                  horizon_c0: int = 1000,
                                  sample_count: int = 1000,
                                  verify_horizon: int = 1000,
                                  seed: int = 0) -> CertificationOutcome:
    """Estimate exponents, build the certificate, and verify the envelope.

    If verification fails (finite-horizon estimates can understate the true
    exponents) the certificate is rebuilt once with epsilon0 halved; a second
    failure is reported as indeterminate rather than retried further.
    """
    orbit = iterate_orbit(seq, x0, estimate_horizon)
    est = estimate_exponents(orbit, tail_fraction)
    cert = build_certificate(seq, x0, eta, est, horizon_c0)
    ver = verify_envelope(seq, x0, cert, sample_count, verify_horizon, seed)
    retried = False
    if not ver.passed:
        retried = True
        cert = build_certificate(seq, x0, eta, est, horizon_c0,
                                 epsilon0=cert.epsilon0 / 2.0)
        ver = verify_envelope(seq, x0, cert, sample_count, verify_horizon, seed)
    return CertificationOutcome(
        certificate=cert, verification=ver, exponents=est,
        retried=retried, indeterminate=not ver.passed,
    )
