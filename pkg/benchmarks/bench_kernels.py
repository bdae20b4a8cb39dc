#!/usr/bin/env python3
"""Benchmark the compiled trajectory kernel against the numpy fallback.

Runs the RK4 bundle stepper over a synthetic velocity-field sequence at
several path counts and prints per-backend timings, the speedup, and a
bitwise-equality check of the results.

    python3 benchmarks/bench_kernels.py [--paths 500 2000 8000] [--intervals 600]
"""

import argparse
import time

import numpy as np

from qtlab._kernels import advance_bundle_native, advance_bundle_numpy


def make_fields(n, n_intervals, rng):
    x_min, dx = -40.0, 80.0 / n
    xs = x_min + dx * np.arange(n)
    fields = []
    for k in range(n_intervals + 1):
        phase = 2.0 * np.pi * k / (n_intervals + 1)
        v = 0.8 * np.sin(2.0 * np.pi * xs / 80.0 + phase) \
            + 0.2 * np.sin(6.0 * np.pi * xs / 80.0)
        fields.append(v)
    valid = np.ones(n, dtype=np.uint8)
    return x_min, dx, fields, valid


def run(kernel, seeds, fields, valid, x_min, dx, n, h, nsub):
    x = seeds.copy()
    status = np.zeros(seeds.size, dtype=np.int8)
    start = time.perf_counter()
    for k in range(len(fields) - 1):
        kernel(x, status, fields[k], fields[k + 1], valid,
               x_min, dx, n, h, nsub)
    return time.perf_counter() - start, x, status


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, nargs="+",
                        default=[500, 2000, 8000])
    parser.add_argument("--intervals", type=int, default=600)
    parser.add_argument("--substeps", type=int, default=4)
    parser.add_argument("--grid", type=int, default=1024)
    args = parser.parse_args()

    if advance_bundle_native is None:
        print("compiled kernel not built; run: python3 setup.py build_ext --inplace")
        return

    rng = np.random.default_rng(0)
    x_min, dx, fields, valid = make_fields(args.grid, args.intervals, rng)

    print(f"grid {args.grid}, {args.intervals} intervals, "
          f"{args.substeps} RK4 substeps each")
    print(f"{'paths':>8} {'native [s]':>12} {'numpy [s]':>12} "
          f"{'speedup':>9} {'bitwise':>8}")
    for npaths in args.paths:
        seeds = rng.uniform(-30.0, 30.0, size=npaths)
        t_nat, x_nat, s_nat = run(advance_bundle_native, seeds, fields,
                                  valid, x_min, dx, args.grid, 0.01,
                                  args.substeps)
        t_np, x_np, s_np = run(advance_bundle_numpy, seeds, fields,
                               valid, x_min, dx, args.grid, 0.01,
                               args.substeps)
        same = np.array_equal(x_nat, x_np) and np.array_equal(s_nat, s_np)
        print(f"{npaths:>8} {t_nat:>12.4f} {t_np:>12.4f} "
              f"{t_np / t_nat:>9.2f} {str(same):>8}")


if __name__ == "__main__":
    main()
