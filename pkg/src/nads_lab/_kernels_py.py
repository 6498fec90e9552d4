"""Pure-Python twin of the compiled orbit kernels.

Performs the exact floating-point operations of ``_kernels.pyx`` in the same
order, so orbits computed here are bitwise identical to the compiled ones
(verified by the kernel test suite and the benchmark).
"""

import math

_NEG_INF = float("-inf")


def logistic_orbit(r, x0, out_x, out_s):
    rs = [float(v) for v in r]
    x = x0
    s = 0.0
    out_x[0] = x
    out_s[0] = 0.0
    i = 1
    for rv in rs:
        d = rv * (1.0 - 2.0 * x)
        ad = abs(d)
        if ad == 0.0:
            s = _NEG_INF
        else:
            s = s + math.log(ad)
        x = rv * x * (1.0 - x)
        out_x[i] = x
        out_s[i] = s
        i += 1


def affine_orbit(slope, intercept, x0, out_x, out_s):
    ss = [float(v) for v in slope]
    bs = [float(v) for v in intercept]
    x = x0
    s = 0.0
    out_x[0] = x
    out_s[0] = 0.0
    for i in range(len(ss)):
        ad = abs(ss[i])
        if ad == 0.0:
            s = _NEG_INF
        else:
            s = s + math.log(ad)
        x = ss[i] * x + bs[i]
        out_x[i + 1] = x
        out_s[i + 1] = s


def poly_orbit(coeffs, x0, out_x, out_s):
    rows = [[float(v) for v in row] for row in coeffs]
    deg = len(rows[0]) - 1 if rows else 0
    x = x0
    s = 0.0
    out_x[0] = x
    out_s[0] = 0.0
    for i, c in enumerate(rows):
        g = deg * c[deg]
        for d in range(deg - 1, 0, -1):
            g = g * x + d * c[d]
        ad = abs(g)
        if ad == 0.0:
            s = _NEG_INF
        else:
            s = s + math.log(ad)
        v = c[deg]
        for d in range(deg - 1, -1, -1):
            v = v * x + c[d]
        x = v
        out_x[i + 1] = x
        out_s[i + 1] = s
