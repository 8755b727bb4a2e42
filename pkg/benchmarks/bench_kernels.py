"""Compare the compiled and pure-Python kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the median wall time per call for each kernel and backend, the
speed-up, and the largest discrepancy between the two backends' outputs.
"""

import argparse
import statistics
import time

import numpy as np

from kcones import _pykernels, kernels
from kcones._random import stream
from kcones.linalg import complex_normal


def _time(fn, repeat):
    ts = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts), out


def altmin_case(n, m, k, seed=0):
    rng = stream(seed, n, m, k)
    G = complex_normal(rng, n * m, n * m)
    A = G + G.conj().T
    Y0 = complex_normal(rng, m, k)
    return lambda impl: impl.altmin(A, n, m, k, Y0)


def anneal_case(n, m, k, proposals=640, seed=0):
    rng = stream(seed, 100 + n, m, k)
    d = n * m
    L = d + 2
    V = complex_normal(rng, d, L)
    pairs = np.array([rng.choice(L, 2, replace=False) for _ in range(proposals)], dtype=np.int64)
    angles = rng.uniform(-np.pi / 2, np.pi / 2, proposals)
    phases = rng.uniform(0, 2 * np.pi, proposals)
    uniforms = rng.uniform(0, 1, proposals)
    return lambda impl: impl.anneal_frame(V, n, m, k, pairs, angles, phases, uniforms, 0.1, 0.95, L)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if "cython" not in kernels.available_backends():
        print("compiled kernels not built; only the Python backend is available")
        return
    from kcones import _ckernels

    cases = []
    for (n, m, k) in [(2, 2, 1), (3, 3, 1), (3, 3, 2), (4, 4, 2), (6, 6, 3)]:
        cases.append((f"altmin {n}x{m} k={k}", altmin_case(n, m, k), 0))
    for (n, m, k) in [(2, 2, 1), (3, 3, 2), (4, 4, 2)]:
        cases.append((f"anneal {n}x{m} k={k}", anneal_case(n, m, k), 1))

    print(f"{'kernel':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speed-up':>10}{'max diff':>12}")
    for name, case, which in cases:
        tp, op = _time(lambda: case(_pykernels), args.repeat)
        tc, oc = _time(lambda: case(_ckernels), args.repeat)
        if which == 0:
            diff = abs(op[0] - oc[0])
        else:
            diff = float(np.abs(op[0] - oc[0]).max())
        print(f"{name:<22}{tp * 1e3:>14.3f}{tc * 1e3:>14.3f}{tp / tc:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
