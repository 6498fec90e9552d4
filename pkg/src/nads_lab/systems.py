"""Built-in map families: logistic, affine, and polynomial sequences.

The logistic family is the main study object; the affine family is the
controlled linear case whose exponents, envelopes, and moduli are known in
closed form, which makes it the ground truth for tests.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    Interval,
    MapSequence,
    ParamSequence,
    validate_derivative,
    validate_self_map,
)
from .errors import ParamRangeError, SelfMapError

__all__ = [
    "LogisticMaps",
    "AffineMaps",
    "PolynomialMaps",
    "logistic",
    "affine",
    "polynomial",
]

UNIT_INTERVAL = Interval(0.0, 1.0)


def _lcm_periods(*schedules: ParamSequence) -> int | None:
    periods = [s.period() for s in schedules]
    if any(p is None for p in periods):
        return None
    return math.lcm(*periods)


class LogisticMaps(MapSequence):
    """f_n(x) = r_n x (1 - x) on [0, 1], with r_n from a parameter schedule.

    Closed forms: f_n'(x) = r_n (1 - 2x) and f_n'' = -2 r_n, so x = 0 is a
    fixed point of every map with f_n'(0) = r_n.
    """

    family = "logistic"

    def __init__(self, params: ParamSequence):
        self.params = params
        self.domain = UNIT_INTERVAL
        self.smoothness = "C2"

    def __repr__(self):
        return f"LogisticMaps({self.params!r})"

    def eval(self, n: int, x: float) -> float:
        r = self.params.value(n)
        return r * x * (1.0 - x)

    def deriv1(self, n: int, x: float) -> float:
        r = self.params.value(n)
        return r * (1.0 - 2.0 * x)

    def deriv2(self, n: int, x: float) -> float:
        return -2.0 * self.params.value(n)

    def eval_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        r = self.params.value(n)
        return r * xs * (1.0 - xs)

    def deriv1_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        r = self.params.value(n)
        return r * (1.0 - 2.0 * xs)

    def deriv2_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(xs, dtype=np.float64), -2.0 * self.params.value(n))

    def critical_points(self, n: int) -> tuple[float, ...]:
        return (0.5,)

    def index_period(self) -> int | None:
        return self.params.period()

    def image_extremes_on_grid(self) -> bool:
        return True

    def kernel_params(self, start: int, stop: int):
        return "logistic", (self.params.values(start, stop),)

    def fixed_point_log_deriv_range(self, x0: float):
        if x0 == 0.0:
            lo, hi = self.params.value_range()
            return math.log(lo), math.log(hi)
        return None

    def second_derivative_sup_certified(self) -> float | None:
        _, hi = self.params.value_range()
        return 2.0 * hi

    def shifted(self, k: int) -> "LogisticMaps":
        return LogisticMaps(self.params.shifted(k))


def logistic(params: ParamSequence) -> LogisticMaps:
    """Logistic family on [0, 1]; requires 0 < r_n <= 4 so maps stay self-maps."""
    lo, hi = params.value_range()
    if not (0.0 < lo and hi <= 4.0):
        raise ParamRangeError(f"logistic parameters must lie in (0, 4], got range [{lo}, {hi}]")
    seq = LogisticMaps(params)
    validate_derivative(seq)
    return seq


class AffineMaps(MapSequence):
    """f_n(x) = s_n x + b_n with per-step slope and intercept schedules."""

    family = "affine"

    def __init__(self, slopes: ParamSequence, intercepts: ParamSequence, domain: Interval):
        self.slopes = slopes
        self.intercepts = intercepts
        self.domain = domain
        self.smoothness = "C2"

    def __repr__(self):
        return f"AffineMaps({self.slopes!r}, {self.intercepts!r}, {self.domain})"

    def eval(self, n: int, x: float) -> float:
        return self.slopes.value(n) * x + self.intercepts.value(n)

    def deriv1(self, n: int, x: float) -> float:
        return self.slopes.value(n)

    def deriv2(self, n: int, x: float) -> float:
        return 0.0

    def eval_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return self.slopes.value(n) * xs + self.intercepts.value(n)

    def deriv1_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(xs, dtype=np.float64), self.slopes.value(n))

    def deriv2_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(xs, dtype=np.float64))

    def index_period(self) -> int | None:
        return _lcm_periods(self.slopes, self.intercepts)

    def image_extremes_on_grid(self) -> bool:
        return True

    def kernel_params(self, start: int, stop: int):
        return "affine", (self.slopes.values(start, stop), self.intercepts.values(start, stop))

    def fixed_point_log_deriv_range(self, x0: float):
        slo, shi = self.slopes.value_range()
        blo, bhi = self.intercepts.value_range()
        fixed = (blo == bhi == 0.0 and x0 == 0.0)
        if not fixed and slo == shi and blo == bhi and slo != 1.0:
            fixed = (x0 == blo / (1.0 - slo))
        if not fixed:
            return None
        if slo > 0.0:
            return math.log(slo), math.log(shi)
        if shi < 0.0:
            return math.log(-shi), math.log(-slo)
        return None  # slopes may vanish: no finite lower bound

    def second_derivative_sup_certified(self) -> float | None:
        return 0.0

    def shifted(self, k: int) -> "AffineMaps":
        return AffineMaps(self.slopes.shifted(k), self.intercepts.shifted(k), self.domain)


def affine(slopes: ParamSequence, intercepts: ParamSequence, domain: Interval,
           validate: bool = True) -> AffineMaps:
    """Affine family on an arbitrary interval.

    With ``validate=False`` the self-map grid check is skipped; orbits then
    raise DomainError the moment a trajectory leaves the interval. Expanding
    slopes (|s| > 1) can only be used this way, since they widen any bounded
    interval.
    """
    seq = AffineMaps(slopes, intercepts, domain)
    if validate:
        try:
            validate_self_map(seq)
        except SelfMapError as exc:
            raise SelfMapError(f"affine family is not a self-map: {exc}") from None
        validate_derivative(seq)
    return seq


class PolynomialMaps(MapSequence):
    """f_n(x) = sum_d c_d(n) x^d with one schedule per coefficient degree."""

    family = "polynomial"

    def __init__(self, coeff_seqs: tuple[ParamSequence, ...], domain: Interval):
        if len(coeff_seqs) == 0:
            raise ValueError("polynomial family needs at least one coefficient schedule")
        self.coeff_seqs = tuple(coeff_seqs)
        self.degree = len(coeff_seqs) - 1
        self.domain = domain
        self.smoothness = "C2"

    def __repr__(self):
        return f"PolynomialMaps(degree={self.degree}, {self.domain})"

    def _coeffs(self, n: int) -> list[float]:
        return [s.value(n) for s in self.coeff_seqs]

    def eval(self, n: int, x: float) -> float:
        c = self._coeffs(n)
        v = c[self.degree]
        for d in range(self.degree - 1, -1, -1):
            v = v * x + c[d]
        return v

    def deriv1(self, n: int, x: float) -> float:
        c = self._coeffs(n)
        g = self.degree * c[self.degree]
        for d in range(self.degree - 1, 0, -1):
            g = g * x + d * c[d]
        return g

    def deriv2(self, n: int, x: float) -> float:
        c = self._coeffs(n)
        if self.degree < 2:
            return 0.0
        g = self.degree * (self.degree - 1) * c[self.degree]
        for d in range(self.degree - 1, 1, -1):
            g = g * x + d * (d - 1) * c[d]
        return g

    def eval_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        c = self._coeffs(n)
        v = np.full_like(np.asarray(xs, dtype=np.float64), c[self.degree])
        for d in range(self.degree - 1, -1, -1):
            v = v * xs + c[d]
        return v

    def deriv1_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        c = self._coeffs(n)
        xs = np.asarray(xs, dtype=np.float64)
        g = np.full_like(xs, self.degree * c[self.degree])
        for d in range(self.degree - 1, 0, -1):
            g = g * xs + d * c[d]
        return g

    def deriv2_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        c = self._coeffs(n)
        xs = np.asarray(xs, dtype=np.float64)
        if self.degree < 2:
            return np.zeros_like(xs)
        g = np.full_like(xs, self.degree * (self.degree - 1) * c[self.degree])
        for d in range(self.degree - 1, 1, -1):
            g = g * xs + d * (d - 1) * c[d]
        return g

    def critical_points(self, n: int) -> tuple[float, ...]:
        c = self._coeffs(n)
        dcoeffs = [d * c[d] for d in range(self.degree, 0, -1)]  # descending
        if len(dcoeffs) < 2 or all(v == 0.0 for v in dcoeffs):
            return ()
        roots = np.roots(dcoeffs)
        real = roots[np.abs(roots.imag) <= 1e-12].real
        inside = sorted(float(x) for x in real if self.domain.contains(float(x)))
        return tuple(inside)

    def index_period(self) -> int | None:
        return _lcm_periods(*self.coeff_seqs)

    def image_extremes_on_grid(self) -> bool:
        return True

    def kernel_params(self, start: int, stop: int):
        cols = [s.values(start, stop) for s in self.coeff_seqs]
        return "poly", (np.ascontiguousarray(np.column_stack(cols)),)

    def shifted(self, k: int) -> "PolynomialMaps":
        return PolynomialMaps(tuple(s.shifted(k) for s in self.coeff_seqs), self.domain)


def polynomial(coeff_seqs: tuple[ParamSequence, ...], domain: Interval,
               validate: bool = True) -> PolynomialMaps:
    """Polynomial family with coefficient schedules ordered by degree."""
    seq = PolynomialMaps(tuple(coeff_seqs), domain)
    if validate:
        validate_self_map(seq)
        validate_derivative(seq)
    return seq
