"""Backend selection for the orbit-stepping kernels.

The compiled extension is used when it was built; otherwise (or when the
``NADS_LAB_PURE_PYTHON`` environment variable is set to a non-empty value
other than "0") the pure-Python twin takes over. Both backends produce
bitwise-identical orbits; only speed differs. ``BACKEND`` reports which one
is active.
"""

from __future__ import annotations

import math
import os

import numpy as np

if os.environ.get("NADS_LAB_PURE_PYTHON", "0") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

        BACKEND = "python"

_NEG_INF = float("-inf")


def run_orbit(seq, x0: float, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Step ``seq`` for ``horizon`` iterations from x0.

    Returns (points, sums): x_0..x_N and the running sums S_0..S_N of
    ln|f_n'(x_n)| with the absorbing -inf sentinel at zero derivatives.
    """
    points = np.empty(horizon + 1)
    sums = np.empty(horizon + 1)
    spec = seq.kernel_params(0, horizon)
    if spec is None:
        _generic_orbit(seq, x0, horizon, points, sums)
    else:
        kind, arrays = spec
        fn = getattr(_impl, f"{kind}_orbit")
        fn(*arrays, x0, points, sums)
    return points, sums


def _generic_orbit(seq, x0, horizon, out_x, out_s):
    # Fallback for map sequences without kernel parameters: scalar stepping
    # through the Python evaluators, same accumulation rule as the kernels.
    x = x0
    s = 0.0
    out_x[0] = x
    out_s[0] = 0.0
    for n in range(horizon):
        ad = abs(seq.deriv1(n, x))
        if ad == 0.0:
            s = _NEG_INF
        else:
            s = s + math.log(ad)
        x = seq.eval(n, x)
        out_x[n + 1] = x
        out_s[n + 1] = s
