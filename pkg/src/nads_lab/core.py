"""Interval maps, parameter schedules, and orbit iteration.

Everything here serves the non-autonomous recursion x_{n+1} = f_n(x_n) on a
fixed real interval: parameter schedules supply the per-step coefficients of
f_n, map sequences evaluate f_n and its derivatives, and ``iterate_orbit``
produces the trajectory together with the running sums of ln|f_n'(x_n)| that
the exponent estimators consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, ClassVar, Sequence

import numpy as np

from .errors import DomainError, SelfMapError, SmoothnessError

__all__ = [
    "Interval",
    "ParamSequence",
    "Constant",
    "Periodic",
    "SeededUniform",
    "BlockDoubling",
    "Explicit",
    "MapSequence",
    "Orbit",
    "param_value",
    "evaluate",
    "iterate_orbit",
    "shift_system",
]

# Grid sizes used by constructor-time validation.
SELF_MAP_GRID = 10_000
DERIV_CHECK_POINTS = 128
APERIODIC_INDEX_SAMPLE = 64


@dataclass(frozen=True)
class Interval:
    """Closed, bounded, non-degenerate interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"interval endpoints must satisfy lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def grid(self, count: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, count)


# ---------------------------------------------------------------------------
# Parameter schedules


class ParamSequence:
    """Deterministic real sequence n -> value(n), defined for all n >= 0.

    Subclasses must make ``value`` pure: the same instance and index always
    produce the same float, and ``values(start, stop)`` must agree bitwise
    with per-index calls.
    """

    kind: ClassVar[str] = "abstract"

    def value(self, n: int) -> float:
        raise NotImplementedError

    def values(self, start: int, stop: int) -> np.ndarray:
        """Materialize value(start) .. value(stop-1) as a float64 array."""
        _check_index(start)
        return np.array([self.value(n) for n in range(start, stop)], dtype=np.float64)

    def value_range(self) -> tuple[float, float]:
        """Exact closed bounds of {value(n) : n >= 0}."""
        raise NotImplementedError

    def period(self) -> int | None:
        """Length of an exact period starting at index 0, if one exists."""
        return None

    def shifted(self, k: int) -> "ParamSequence":
        if k == 0:
            return self
        return _Shifted(self, k)


def _check_index(n: int) -> None:
    if n < 0:
        raise ValueError(f"step index must be nonnegative, got {n}")


def param_value(spec: ParamSequence, n: int) -> float:
    """Value of a parameter schedule at step n."""
    _check_index(n)
    return spec.value(n)


@dataclass(frozen=True)
class Constant(ParamSequence):
    c: float

    kind: ClassVar[str] = "constant"

    def value(self, n: int) -> float:
        _check_index(n)
        return float(self.c)

    def values(self, start: int, stop: int) -> np.ndarray:
        _check_index(start)
        return np.full(stop - start, float(self.c))

    def value_range(self) -> tuple[float, float]:
        return float(self.c), float(self.c)

    def period(self) -> int | None:
        return 1


class Periodic(ParamSequence):
    """Cycles through a finite list of values."""

    kind: ClassVar[str] = "periodic"

    def __init__(self, cycle: Sequence[float]):
        if len(cycle) == 0:
            raise ValueError("periodic schedule needs at least one value")
        self.cycle = tuple(float(v) for v in cycle)
        self._arr = np.array(self.cycle)

    def __repr__(self):
        return f"Periodic({list(self.cycle)})"

    def value(self, n: int) -> float:
        _check_index(n)
        return self.cycle[n % len(self.cycle)]

    def values(self, start: int, stop: int) -> np.ndarray:
        _check_index(start)
        idx = np.arange(start, stop) % len(self.cycle)
        return self._arr[idx]

    def value_range(self) -> tuple[float, float]:
        return min(self.cycle), max(self.cycle)

    def period(self) -> int | None:
        return len(self.cycle)


class SeededUniform(ParamSequence):
    """Uniform values in [lo, hi] with O(1) random access by index.

    Backed by the Philox4x64-10 counter-based generator (stream id
    ``philox4x64-10/counter-v1``): index n reads the first 64-bit word of
    counter block n, so value(n) never needs the preceding n-1 values and
    bulk materialization reproduces per-index access bitwise.
    """

    kind: ClassVar[str] = "seeded-uniform"
    GENERATOR: ClassVar[str] = "philox4x64-10/counter-v1"

    def __init__(self, lo: float, hi: float, seed: int):
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise ValueError(f"seeded-uniform bounds must satisfy lo < hi, got [{lo}, {hi}]")
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self.lo, self.hi, self.seed = lo, hi, int(seed)

    def __repr__(self):
        return f"SeededUniform({self.lo}, {self.hi}, seed={self.seed})"

    def _words(self, start: int, count: int) -> np.ndarray:
        from numpy.random import Philox

        raw = Philox(key=self.seed, counter=start).random_raw(4 * count)
        return raw[0::4]

    def value(self, n: int) -> float:
        _check_index(n)
        w = int(self._words(n, 1)[0])
        u = (w >> 11) * 2.0**-53
        return self.lo + (self.hi - self.lo) * u

    def values(self, start: int, stop: int) -> np.ndarray:
        _check_index(start)
        if stop <= start:
            return np.empty(0)
        w = self._words(start, stop - start)
        u = (w >> np.uint64(11)) * 2.0**-53
        return self.lo + (self.hi - self.lo) * u

    def value_range(self) -> tuple[float, float]:
        return self.lo, self.hi


@dataclass(frozen=True)
class BlockDoubling(ParamSequence):
    """v1 and v2 on alternating index blocks of lengths 1, 2, 4, 8, ...

    Block b covers indices [2^b - 1, 2^{b+1} - 2] and takes v1 for even b,
    v2 for odd b. Cesàro averages along such a schedule keep oscillating, so
    running means of ln|f'| have distinct upper and lower cluster values.
    """

    v1: float
    v2: float

    kind: ClassVar[str] = "block-doubling"

    def value(self, n: int) -> float:
        _check_index(n)
        b = (n + 1).bit_length() - 1
        return float(self.v1) if b % 2 == 0 else float(self.v2)

    def values(self, start: int, stop: int) -> np.ndarray:
        _check_index(start)
        if stop <= start:
            return np.empty(0)
        n = np.arange(start, stop, dtype=np.float64) + 1.0
        _, e = np.frexp(n)  # n = m * 2^e with m in [0.5, 1): e == bit_length(n)
        b = e - 1
        return np.where(b % 2 == 0, float(self.v1), float(self.v2))

    def value_range(self) -> tuple[float, float]:
        v1, v2 = float(self.v1), float(self.v2)
        return min(v1, v2), max(v1, v2)


class Explicit(ParamSequence):
    """A finite head of listed values, continued forever with a tail value."""

    kind: ClassVar[str] = "explicit"

    def __init__(self, head: Sequence[float], tail: float):
        self.head = tuple(float(v) for v in head)
        self.tail = float(tail)
        self._arr = np.array(self.head + (self.tail,))

    def __repr__(self):
        return f"Explicit({list(self.head)}, tail={self.tail})"

    def value(self, n: int) -> float:
        _check_index(n)
        return self.head[n] if n < len(self.head) else self.tail

    def values(self, start: int, stop: int) -> np.ndarray:
        _check_index(start)
        idx = np.minimum(np.arange(start, stop), len(self.head))
        return self._arr[idx]

    def value_range(self) -> tuple[float, float]:
        vals = self.head + (self.tail,)
        return min(vals), max(vals)


class _Shifted(ParamSequence):
    """Index-shifted view: value(n) = base.value(n + k)."""

    kind: ClassVar[str] = "shifted"

    def __init__(self, base: ParamSequence, k: int):
        if k < 1:
            raise ValueError("shift must be a positive integer")
        self.base = base
        self.k = int(k)

    def __repr__(self):
        return f"_Shifted({self.base!r}, k={self.k})"

    def value(self, n: int) -> float:
        _check_index(n)
        return self.base.value(n + self.k)

    def values(self, start: int, stop: int) -> np.ndarray:
        _check_index(start)
        return self.base.values(start + self.k, stop + self.k)

    def value_range(self) -> tuple[float, float]:
        # Superset of the shifted range; safe for validation and bounds.
        return self.base.value_range()

    def period(self) -> int | None:
        return self.base.period()

    def shifted(self, k: int) -> ParamSequence:
        return _Shifted(self.base, self.k + k) if k else self


# ---------------------------------------------------------------------------
# Map sequences


class MapSequence:
    """Sequence of C1 (optionally C2) self-maps f_n of a fixed interval.

    Concrete families provide scalar and vectorized evaluators that perform
    identical floating-point operations, so grid checks and orbit stepping
    agree bitwise with pointwise evaluation.
    """

    domain: Interval
    smoothness: str  # "C1" or "C2"

    # -- evaluation -------------------------------------------------------
    def eval(self, n: int, x: float) -> float:
        raise NotImplementedError

    def deriv1(self, n: int, x: float) -> float:
        raise NotImplementedError

    def deriv2(self, n: int, x: float) -> float:
        raise SmoothnessError(f"{type(self).__name__} does not provide a second derivative")

    def eval_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return np.array([self.eval(n, float(x)) for x in xs])

    def deriv1_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return np.array([self.deriv1(n, float(x)) for x in xs])

    def deriv2_array(self, n: int, xs: np.ndarray) -> np.ndarray:
        return np.array([self.deriv2(n, float(x)) for x in xs])

    # -- structure --------------------------------------------------------
    def critical_points(self, n: int) -> tuple[float, ...]:
        """Roots of f_n' inside the domain (image extremes for smooth maps)."""
        return ()

    def index_period(self) -> int | None:
        """Exact period of n -> f_n if the parameter schedules provide one."""
        return None

    def image_extremes_on_grid(self) -> bool:
        """True when endpoints + critical points pin every f_n's exact range."""
        return False

    def kernel_params(self, start: int, stop: int):
        """(kind, arrays) consumed by the stepping kernels, or None."""
        return None

    def fixed_point_log_deriv_range(self, x0: float) -> tuple[float, float] | None:
        """Certified bounds of ln|f_n'(x0)| over all n, when x0 is a common
        fixed point and the family can bound the derivative exactly."""
        return None

    def second_derivative_sup_certified(self) -> float | None:
        """Exact sup over all n, x of |f_n''(x)| when the family knows it."""
        return None

    def shifted(self, k: int) -> "MapSequence":
        raise NotImplementedError


@dataclass(frozen=True)
class Orbit:
    """Trajectory of x_{n+1} = f_n(x_n) plus log-derivative partial sums.

    ``points[n]`` is x_n for n = 0..horizon. ``log_deriv_sums[n]`` is
    S_n = sum_{k<n} ln|f_k'(x_k)| with S_0 = 0; once some |f_k'(x_k)| is
    exactly zero every later entry is the absorbing -inf sentinel.
    """

    x0: float
    points: np.ndarray
    log_deriv_sums: np.ndarray
    horizon: int


def evaluate(seq: MapSequence, n: int, x: float) -> float:
    """f_n(x) with a domain check on the input."""
    _check_index(n)
    if not seq.domain.contains(x):
        raise DomainError(f"x={x} is outside [{seq.domain.lo}, {seq.domain.hi}]")
    return seq.eval(n, float(x))


def iterate_orbit(seq: MapSequence, x0: float, horizon: int) -> Orbit:
    """Iterate the system for ``horizon`` steps starting at x0.

    Deterministic: repeated calls produce bitwise-identical arrays. Raises
    DomainError if x0 is outside the domain or the trajectory leaves it
    (possible only for unvalidated map sequences).
    """
    from . import kernels

    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    x0 = float(x0)
    if not seq.domain.contains(x0):
        raise DomainError(f"x0={x0} is outside [{seq.domain.lo}, {seq.domain.hi}]")
    points, sums = kernels.run_orbit(seq, x0, int(horizon))
    if points.min() < seq.domain.lo or points.max() > seq.domain.hi:
        raise DomainError("orbit left the domain; the map sequence is not a self-map")
    points.setflags(write=False)
    sums.setflags(write=False)
    return Orbit(x0=x0, points=points, log_deriv_sums=sums, horizon=int(horizon))


def shift_system(seq: MapSequence, k: int) -> MapSequence:
    """The system g_n := f_{n+k} on the same domain (k >= 1)."""
    if k < 1:
        raise ValueError(f"shift must be a positive integer, got {k}")
    return seq.shifted(int(k))


# ---------------------------------------------------------------------------
# Constructor-time validation shared by the family factories


def sample_indices(seq: MapSequence, fallback: int = APERIODIC_INDEX_SAMPLE) -> range:
    """Indices that determine the sequence exactly (one period) or, for
    aperiodic schedules, a fixed evidence sample."""
    p = seq.index_period()
    return range(p) if p is not None else range(fallback)


def validate_self_map(seq: MapSequence, grid_points: int = SELF_MAP_GRID) -> None:
    """Check f_n(domain) within the domain on a dense grid, endpoints, and
    critical points, for one period (or the first indices when aperiodic)."""
    dom = seq.domain
    base = dom.grid(grid_points)
    for n in sample_indices(seq):
        crit = [c for c in seq.critical_points(n) if dom.contains(c)]
        pts = np.concatenate([base, np.array(crit)]) if crit else base
        img = seq.eval_array(n, pts)
        if img.min() < dom.lo or img.max() > dom.hi:
            bad = pts[int(np.argmax((img < dom.lo) | (img > dom.hi)))]
            raise SelfMapError(
                f"f_{n} maps x={bad} to {seq.eval(n, float(bad))}, "
                f"outside [{dom.lo}, {dom.hi}]"
            )


def validate_derivative(seq: MapSequence, rel_tol: float = 1e-6,
                        points: int = DERIV_CHECK_POINTS) -> None:
    """Self-check deriv1 against a central finite difference of eval."""
    dom = seq.domain
    h = dom.width * 1e-6
    xs = np.linspace(dom.lo + h, dom.hi - h, points)
    for n in sample_indices(seq, fallback=8):
        fd = (seq.eval_array(n, xs + h) - seq.eval_array(n, xs - h)) / (2.0 * h)
        d1 = seq.deriv1_array(n, xs)
        scale = np.maximum(1.0, np.abs(d1))
        err = np.abs(fd - d1) / scale
        if err.max() > rel_tol:
            i = int(np.argmax(err))
            raise SmoothnessError(
                f"deriv1 of f_{n} disagrees with finite differences at "
                f"x={xs[i]}: {d1[i]} vs {fd[i]}"
            )
