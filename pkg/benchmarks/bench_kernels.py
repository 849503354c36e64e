"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from moesonar import _kernels_py as py

try:
    from moesonar import _kernels_cy as cy
except ImportError:
    cy = None


def quadrature(mod):
    e = np.zeros(0)
    for s in np.linspace(0.1, 10, 50):
        mod.simpson_gauss(py.RATIONAL_HALF, (s, 0.0), e, e, 0.0, 1.0, -10.0, 10.0, 1e-10, 10**6)


def make_kalman_inputs(n=2000):
    rng = np.random.default_rng(0)
    t = np.arange(n) * 10.0
    z = np.column_stack([5.0 * t, 100.0 + 0.5 * t]) + rng.normal(0, 3, (n, 2))
    return t, z, np.tile([9.0, 1.0, 16.0], (n, 1))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    t, z, r = make_kalman_inputs()
    cases = {
        "adaptive Simpson, 50 integrals": lambda mod: quadrature(mod),
        "Kalman filter, 2000 updates": lambda mod: mod.kalman_cv(t, z, r, 1e-2, 100.0),
    }
    print(f"{'kernel':34s} {'python (s)':>11s} {'cython (s)':>11s} {'speed-up':>9s}")
    for name, fn in cases.items():
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:34s} {tp:11.4f} {'n/a':>11s} {'n/a':>9s}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        print(f"{name:34s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
