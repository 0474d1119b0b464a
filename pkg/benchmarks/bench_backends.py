"""Timing comparison of the compiled convolution core against the numpy
fallback.

Run from the repository root:

    python benchmarks/bench_backends.py [--tmax 600] [--reps 3]

Reports per-kernel timings on a fixed window plus end-to-end return-series
evolution for both backends and both schedules.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from latzeta import backend, kernels, walks


def time_call(fn, reps):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(side, reps):
    rng = np.random.Generator(np.random.Philox(key=1))
    src = np.abs(rng.standard_normal((side, side)))
    dst = np.zeros_like(src)
    other = np.abs(rng.standard_normal((side, side)))
    walk = walks.builtin_walk("lsrw")
    dist = walk.one_step_distribution()
    offs = np.array(sorted(dist), dtype=np.int64)
    dxs, dys = offs[:, 0].copy(), offs[:, 1].copy()
    probs = np.array([dist[tuple(o)] for o in offs])
    lo, hi = 2, side - 2

    rows = []
    for name in available_backends():
        core = backend.get_backend(name)
        t_stencil = time_call(lambda: core.stencil_apply(src, dst, dxs, dys, probs, lo, hi, lo, hi), reps)
        t_dot = time_call(lambda: core.window_dot(src, other, lo, hi, lo, hi), reps)
        t_pair = time_call(lambda: core.window_dot_pair(src, dst, other, lo, hi, lo, hi), reps)
        rows.append((name, t_stencil, t_dot, t_pair))
    return rows


def bench_evolution(t_max, reps):
    walk = walks.builtin_walk("lsrw")
    rows = []
    for name in available_backends():
        for strategy in ("direct", "split"):
            t = time_call(
                lambda: kernels.evolve_full(walk, (0, 0), t_max, strategy=strategy, backend=name),
                reps,
            )
            rows.append((name, strategy, t))
    return rows


def available_backends():
    names = ["python"]
    if backend.HAVE_COMPILED:
        names.insert(0, "compiled")
    return names


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--side", type=int, default=1501, help="window side for kernel timings")
    parser.add_argument("--tmax", type=int, default=600, help="series length for end-to-end timing")
    parser.add_argument("--reps", type=int, default=3)
    args = parser.parse_args()

    if not backend.HAVE_COMPILED:
        print("note: compiled core not built; showing the numpy fallback only")

    print(f"\nper-kernel timings on a {args.side}x{args.side} window (best of {args.reps})")
    print(f"{'backend':>10} {'stencil_apply':>14} {'window_dot':>12} {'window_dot_pair':>16}")
    kernel_rows = bench_kernels(args.side, args.reps)
    for name, ts, td, tp in kernel_rows:
        print(f"{name:>10} {ts * 1e3:>12.2f}ms {td * 1e3:>10.2f}ms {tp * 1e3:>14.2f}ms")
    if len(kernel_rows) == 2:
        speedup = kernel_rows[1][1] / kernel_rows[0][1]
        print(f"stencil speedup: {speedup:.2f}x")

    print(f"\nend-to-end return series to t={args.tmax} (best of {args.reps})")
    print(f"{'backend':>10} {'schedule':>10} {'time':>10}")
    for name, strategy, t in bench_evolution(args.tmax, args.reps):
        print(f"{name:>10} {strategy:>10} {t:>9.3f}s")


if __name__ == "__main__":
    main()
