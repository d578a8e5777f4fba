"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 3]

Both backends get identical inputs; results are checked for equality before
timings are reported.
"""

import argparse
import timeit

import numpy as np

from healthcep import kernels


def make_inputs(n, seed=0):
    rng = np.random.default_rng(seed)

    def intervals():
        starts = np.sort(rng.integers(0, 50 * n, n)).astype(np.int64)
        ends = starts + rng.integers(1, 100, n)
        return kernels.python_backend.normalize(starts, ends)

    times = np.cumsum(rng.integers(1, 20, n)).astype(np.int64)
    values = 70 + 10 * rng.standard_normal(n)
    a, b = intervals(), intervals()
    return {
        "normalize": lambda k: k.normalize(np.ascontiguousarray(a[0][::-1]), np.ascontiguousarray(a[1][::-1])),
        "intersect": lambda k: k.intersect(*a, *b),
        "union": lambda k: k.union(*a, *b),
        "complement": lambda k: k.complement(*a, -1, 50 * n + 200),
        "hold_runs": lambda k: k.hold_runs(times, values > 75, 60),
        "trailing_median": lambda k: k.trailing_median(times, values, 120),
    }


def same(x, y):
    if isinstance(x, tuple):
        return all(np.array_equal(p, q) for p, q in zip(x, y))
    return np.array_equal(x, y, equal_nan=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="intervals / samples per input")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    c, p = kernels.compiled_backend, kernels.python_backend
    if c is None:
        print("compiled kernels are not built; nothing to compare")
        return 1
    print(f"n={args.n}  best of {args.repeat}")
    print(f"{'kernel':<16}{'python s':>10}{'cython s':>10}{'speedup':>9}")
    for name, call in make_inputs(args.n).items():
        assert same(call(c), call(p)), name
        tp = min(timeit.repeat(lambda: call(p), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: call(c), number=1, repeat=args.repeat))
        print(f"{name:<16}{tp:>10.4f}{tc:>10.4f}{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
