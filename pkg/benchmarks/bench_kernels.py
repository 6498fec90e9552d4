"""Benchmark the compiled orbit kernels against the pure-Python fallback.

Both backends perform identical IEEE-754 operations, so besides timing them
this script verifies that their outputs are bitwise equal.

Usage: python benchmarks/bench_kernels.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from nads_lab import _kernels_py
from nads_lab.core import Constant, Interval, SeededUniform
from nads_lab.systems import affine, logistic

try:
    from nads_lab import _kernels
except ImportError:
    _kernels = None


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(name, kind, arrays, x0, steps, repeats):
    out_x = np.empty(steps + 1)
    out_s = np.empty(steps + 1)
    py_fn = getattr(_kernels_py, f"{kind}_orbit")
    t_py = best_time(lambda: py_fn(*arrays, x0, out_x, out_s), repeats)
    ref_x, ref_s = out_x.copy(), out_s.copy()
    row = [name, steps, t_py * 1e3, steps / t_py / 1e6]
    if _kernels is not None:
        cy_fn = getattr(_kernels, f"{kind}_orbit")
        t_cy = best_time(lambda: cy_fn(*arrays, x0, out_x, out_s), repeats)
        identical = np.array_equal(out_x, ref_x) and np.array_equal(out_s, ref_s)
        row += [t_cy * 1e3, steps / t_cy / 1e6, t_py / t_cy, identical]
    return row


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=1 << 20)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    steps = args.steps
    cases = []

    seq = logistic(SeededUniform(0.5, 3.9, seed=1))
    cases.append(("logistic", *seq.kernel_params(0, steps), 0.37))

    seq = affine(Constant(0.5), Constant(0.25), Interval(0.0, 1.0))
    cases.append(("affine", *seq.kernel_params(0, steps), 0.9))

    header = ["case", "steps", "python ms", "python Msteps/s"]
    if _kernels is not None:
        header += ["cython ms", "cython Msteps/s", "speedup", "bitwise equal"]
    else:
        print("compiled kernels not available; timing the fallback only\n")

    rows = [bench_case(name, kind, arrays, x0, steps, args.repeats)
            for name, kind, arrays, x0 in cases]

    widths = [max(len(str(header[i])), *(len(_fmt(r[i])) for r in rows))
              for i in range(len(header))]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(_fmt(v).ljust(w) for v, w in zip(r, widths)))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


if __name__ == "__main__":
    main()
