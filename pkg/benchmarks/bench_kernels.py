"""Compare the compiled and numpy implementations of the linear RK4 kernel.

Run with ``python benchmarks/bench_kernels.py [--steps N] [--repeat R]``.
"""

import argparse
import timeit

import numpy as np

from killing_transport._kernels import backends


def problem(steps: int, d: int = 3, k: int = 3, seed: int = 0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((steps + 1, d, d))
    A = A - np.swapaxes(A, -1, -2)
    mid = 0.5 * (A[:-1] + A[1:])
    return A, mid, 1.0 / steps, np.eye(d, k)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--steps", type=int, nargs="+", default=[1000, 4000, 16000])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    impls = backends()
    print(f"{'steps':>8} " + " ".join(f"{name:>12}" for name in impls) + "      speedup  max|diff|")
    for steps in args.steps:
        qn, qm, dt, y0 = problem(steps)
        times, results = {}, {}
        for name, fn in impls.items():
            results[name] = fn(qn, qm, dt, y0)
            times[name] = min(timeit.repeat(lambda: fn(qn, qm, dt, y0), number=1, repeat=args.repeat))
        diff = max(float(np.max(np.abs(r - results["python"]))) for r in results.values())
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        cols = " ".join(f"{1e3 * times[name]:10.3f}ms" for name in impls)
        print(f"{steps:>8} {cols} {speed:11.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
