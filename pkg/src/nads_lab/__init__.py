"""nads-lab: numerical experiments for non-autonomous interval dynamics.

Orbits of x_{n+1} = f_n(x_n) on real intervals, finite-time Lyapunov
exponents with upper/lower tail estimators, empirical strong-sensitivity
probing, discrete Gronwall bounds, and exponential-stability certificates
with explicit constants.
"""

from .core import (
    BlockDoubling,
    Constant,
    Explicit,
    Interval,
    MapSequence,
    Orbit,
    ParamSequence,
    Periodic,
    SeededUniform,
    evaluate,
    iterate_orbit,
    param_value,
    shift_system,
)
from .errors import (
    ConfigError,
    DomainError,
    EmptyInputError,
    HypothesisError,
    NadsLabError,
    NegativeInputError,
    ParamRangeError,
    ParseError,
    PreconditionError,
    RangeError,
    SelfMapError,
    SmoothnessError,
)
from .hypotheses import (
    HypothesisReport,
    ModulusEstimate,
    check_invariance,
    check_theorem,
    compose_modulus,
    derivative_infimum,
    derivative_modulus,
    estimate_modulus,
    function_modulus,
    second_derivative_bound,
)
from .kernels import BACKEND
from .lyapunov import (
    ExponentEstimate,
    estimate_exponents,
    finite_time_exponents,
    shift_exponent_check,
)
from .sensitivity import (
    NOT_DETECTED,
    STRONGLY_SENSITIVE,
    UNDETERMINED,
    ProbeResult,
    SensitivityReport,
    probe_separation,
    sensitivity_in_set_test,
    shift_sensitivity_check,
    strong_sensitivity_test,
)
from .stability import (
    EnvelopeFit,
    StabilityCertificate,
    build_certificate,
    certify_exponential_stability,
    compute_c0,
    discrete_gronwall_bound,
    fit_envelope,
    lyapunov_stability_test,
    verify_envelope,
)
from .systems import affine, logistic, polynomial

__version__ = "0.1.0"
