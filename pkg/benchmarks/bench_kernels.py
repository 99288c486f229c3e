"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per kernel and problem size with the best-of-N time for each
backend and the speedup.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ecf_toolkit import kernels
from ecf_toolkit.depset import _constraint_matrix, halfspaces_from_ecf
from ecf_toolkit.ecf import random_valid_ecf


def cases():
    for m in (8, 12, 14):
        theta = random_valid_ecf(m, 10, seed=m).theta
        yield f"tau_direct m={m}", "tau_direct", (theta, m)
    for m in (12, 18):
        theta = random_valid_ecf(m, 10, seed=m).theta
        yield f"tau_mobius m={m}", "tau_mobius", (theta, m)
        yield f"subset_zeta m={m}", "subset_zeta", (theta, m)
    rs = np.random.default_rng(0)
    yield "subset_max m=18", "subset_max", (rs.uniform(size=18), 18)
    a = rs.uniform(size=(4, 15))
    z = rs.uniform(size=(100_000, 15))
    yield "maxlinear_apply 1e5 x 4 x 15", "maxlinear_apply", (a, z)
    for m in (4, 5):
        g, h = _constraint_matrix(halfspaces_from_ecf(random_valid_ecf(m, 8, seed=1)), m)
        yield f"vertex_candidates m={m}", "vertex_candidates", (g, h, 1e-9)


def best_of(fn, args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-slow", action="store_true", help="skip the python vertex_candidates at m=5")
    args = ap.parse_args()
    backends = kernels.available()
    if "compiled" not in backends:
        print("compiled kernels are not built; only the fallback is available")
    names = sorted(backends)
    print(f"{'case':32s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fname, fargs in cases():
        times = {}
        for n in names:
            if args.skip_slow and n == "python" and label == "vertex_candidates m=5":
                continue
            times[n] = best_of(getattr(backends[n], fname), fargs, args.repeat)
        row = f"{label:32s}" + "".join(f"{times[n] * 1e3:12.3f}ms" if n in times else f"{'-':>14s}" for n in names)
        if len(times) == 2:
            row += f"  {times['python'] / times['compiled']:8.1f}x"
        print(row, flush=True)


if __name__ == "__main__":
    main()
