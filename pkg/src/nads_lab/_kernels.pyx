# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled orbit-stepping kernels.

Each kernel advances x_{n+1} = f_n(x_n) and accumulates the running sum of
ln|f_n'(x_n)|, writing x_0..x_N and S_0..S_N into caller-provided arrays.
A zero derivative switches the sum to the absorbing -inf sentinel.

Compiled with -ffp-contract=off: the arithmetic below performs exactly the
same IEEE-754 operations, in the same order, as the pure-Python fallback in
``_kernels_py``, so the two backends produce bitwise-identical orbits.
"""

from libc.math cimport INFINITY, fabs, log


def logistic_orbit(const double[::1] r, double x0,
                   double[::1] out_x, double[::1] out_s):
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t i
    cdef double x = x0
    cdef double s = 0.0
    cdef double d, ad
    out_x[0] = x
    out_s[0] = 0.0
    for i in range(n):
        d = r[i] * (1.0 - 2.0 * x)
        ad = fabs(d)
        if ad == 0.0:
            s = -INFINITY
        else:
            s = s + log(ad)
        x = r[i] * x * (1.0 - x)
        out_x[i + 1] = x
        out_s[i + 1] = s


def affine_orbit(const double[::1] slope, const double[::1] intercept, double x0,
                 double[::1] out_x, double[::1] out_s):
    cdef Py_ssize_t n = slope.shape[0]
    cdef Py_ssize_t i
    cdef double x = x0
    cdef double s = 0.0
    cdef double ad
    out_x[0] = x
    out_s[0] = 0.0
    for i in range(n):
        ad = fabs(slope[i])
        if ad == 0.0:
            s = -INFINITY
        else:
            s = s + log(ad)
        x = slope[i] * x + intercept[i]
        out_x[i + 1] = x
        out_s[i + 1] = s


def poly_orbit(const double[:, ::1] coeffs, double x0,
               double[::1] out_x, double[::1] out_s):
    cdef Py_ssize_t n = coeffs.shape[0]
    cdef Py_ssize_t deg = coeffs.shape[1] - 1
    cdef Py_ssize_t i, d
    cdef double x = x0
    cdef double s = 0.0
    cdef double v, g, ad
    out_x[0] = x
    out_s[0] = 0.0
    for i in range(n):
        g = (<double>deg) * coeffs[i, deg]
        for d in range(deg - 1, 0, -1):
            g = g * x + (<double>d) * coeffs[i, d]
        ad = fabs(g)
        if ad == 0.0:
            s = -INFINITY
        else:
            s = s + log(ad)
        v = coeffs[i, deg]
        for d in range(deg - 1, -1, -1):
            v = v * x + coeffs[i, d]
        x = v
        out_x[i + 1] = x
        out_s[i + 1] = s
