"""Benchmark the compiled extension against the numpy fallback on the two
hot kernels: the batched iterated-integral chain recursions and the
midpoint-Heun system stepper.

Usage: python bench/benchmark_backends.py [--paths N] [--steps M]
"""

import argparse
import math
import time

import numpy as np

from chaoscale import backend
from chaoscale.chaos import Kernel, single_term_vector, term, vector
from chaoscale.factors import constant, poly
from chaoscale.simulate import brownian_batch, chaos_paths
from chaoscale.system import build_system, integrate_system_batch


def timeit(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=1024)
    args = ap.parse_args()

    names = backend.available()
    if "compiled" not in names:
        print("compiled extension not built; nothing to compare")

    dw = brownian_batch(args.steps, 12345, 0, args.paths)
    x3 = vector(
        Kernel(1, (term(1.0, poly([0.0, 1.0])),)),
        Kernel(2, (term(0.7, constant(1.0), constant(1.0)),)),
        Kernel(3, (term(0.3, constant(1.0), poly([1.0, 1.0]), constant(1.0)),)),
    )
    xs = single_term_vector(1.0, poly([0.0, 1.0]), poly([1.0, 1.0]))
    dyn = build_system(xs, eps=0.5)

    rows = []
    for name in names:
        with backend.force(name):
            t_ito = timeit(lambda: chaos_paths(x3, dw, "ito"))
            t_strat = timeit(lambda: chaos_paths(x3, dw, "strat"))
            t_heun = timeit(lambda: integrate_system_batch(dyn, dw))
        rows.append((name, t_ito, t_strat, t_heun))

    print(f"\n{args.paths} paths x {args.steps} steps")
    print(f"{'backend':>10} {'ito chains':>12} {'strat chains':>13} {'heun system':>12}")
    for name, a, b, c in rows:
        print(f"{name:>10} {a:>11.3f}s {b:>12.3f}s {c:>11.3f}s")
    if len(rows) == 2:
        base = {r[0]: r[1:] for r in rows}
        speedups = [n / c for n, c in zip(base["numpy"], base["compiled"])]
        print(
            f"{'speedup':>10} {speedups[0]:>11.1f}x {speedups[1]:>12.1f}x "
            f"{speedups[2]:>11.1f}x"
        )

    # cross-check while we're here
    with backend.force("numpy"):
        a = chaos_paths(x3, dw[:16], "ito")
    if "compiled" in names:
        with backend.force("compiled"):
            b = chaos_paths(x3, dw[:16], "ito")
        print(f"max |numpy - compiled| on a probe batch: {np.max(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()
