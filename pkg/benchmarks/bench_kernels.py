"""Compare the compiled and pure-Python integration kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--t1 100]

Each case integrates one system over ``[0, t1]`` with both backends, checks
that the accepted steps agree bit for bit, and reports best-of-``repeat``
wall times and the speedup.
"""
import argparse
import math
import time

import numpy as np

from sl2flow import kernels
from sl2flow.charts import ReducedState, reduced_to_ambient
from sl2flow.dynamics import ambient_array

try:
    from sl2flow import _kernels  # noqa: F401
except ImportError:
    _kernels = None


def _cases():
    rs = ReducedState((0.7, 0.2, 0.1), (0.3, 0.5, 1.2))
    return [
        ("Ambient", kernels.AMBIENT, ambient_array(reduced_to_ambient(rs)), 1.0),
        ("Hamsys", kernels.HAMSYS, np.array([0.3, -0.2, 0.1, 0.4, 0.5, 1.0]), 0.0),
        ("Hamsys2", kernels.HAMSYS2, np.array([0.7, 0.2, 0.1, 0.3, 0.5, 1.2]), 1.0),
        ("Hamsys3", kernels.HAMSYS3, np.array([0.5, 0.0, 0.0, 0.2, 0.0, 4.0]), 1.0),
    ]


def _best(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--t1", type=float, default=100.0)
    ap.add_argument("--rtol", type=float, default=1e-10)
    ap.add_argument("--atol", type=float, default=1e-12)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernel not built; nothing to compare")
        return 1
    print(f"{'system':8s} {'steps':>7s} {'cython [s]':>11s} {'python [s]':>11s} "
          f"{'speedup':>8s}  identical")
    for name, system, y0, kappa in _cases():
        assert len(y0) == kernels.DIMS[system], name
        runs = {}
        for be in ("cython", "python"):
            runs[be] = _best(lambda: kernels.solve(system, y0, 0.0, args.t1, kappa, args.rtol,
                                                   args.atol, backend=be), args.repeat)
        (tc, rc), (tp, rp) = runs["cython"], runs["python"]
        same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(rc[:3], rp[:3]))
        print(f"{name:8s} {len(rc[0]):7d} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f}  {bool(same)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
