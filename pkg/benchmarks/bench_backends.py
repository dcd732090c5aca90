"""Time the accelerated kernels against the pure-numpy fallback.

Runs each core kernel (2D histogram, axis histograms, circular
correlation, grid-search scoring) on both backends across point-set
sizes and prints a speedup table.  Results are also written as CSV when
--out is given.

Usage: python3 benchmarks/bench_backends.py [--sizes 10000,100000] [--out csv]
"""

import argparse
import csv
import sys
import time

import numpy as np

from sphalign import backend, hist, so3, wahba


def _unit_sphere(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _kernels(points, grid):
    h2d = hist.build_binary_histogram_2d(points)
    marginal = hist.marginalize_azimuth(h2d)
    return {
        "hist2d": lambda: hist.build_binary_histogram_2d(points),
        "axis_hists": lambda: hist.build_axis_histograms(points),
        "correlate": lambda: hist.circular_cross_correlate(marginal, marginal),
        "grid_scores": lambda: wahba.brute_force_search(points, points, grid),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="10000,100000")
    parser.add_argument("--grid-step", type=float, default=30.0,
                        help="grid step for the scoring kernel (coarse keeps it quick)")
    parser.add_argument("--out", help="optional CSV output path")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    available = backend.warmup()
    if available == "numpy":
        print("accelerated backend unavailable; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    rows = []
    print(f"comparing '{available}' against 'numpy' (best of 5 runs)\n")
    print(f"{'n_points':>10} {'kernel':>12} {'numpy (ms)':>12} {available + ' (ms)':>12} {'speedup':>9}")
    for n in sizes:
        points = _unit_sphere(rng, n)
        timings = {}
        for name in (available, "numpy"):
            backend.set_backend(name)
            backend.warmup()
            for kernel, fn in _kernels(points, args.grid_step).items():
                timings[(name, kernel)] = _time(fn)
        backend.set_backend("auto")
        for kernel in ("hist2d", "axis_hists", "correlate", "grid_scores"):
            t_np = timings[("numpy", kernel)]
            t_acc = timings[(available, kernel)]
            rows.append((n, kernel, t_np, t_acc, t_np / t_acc))
            print(
                f"{n:>10} {kernel:>12} {t_np * 1e3:>12.2f} {t_acc * 1e3:>12.2f} "
                f"{t_np / t_acc:>8.1f}x"
            )

    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n_points", "kernel", "numpy_s", f"{available}_s", "speedup"])
            writer.writerows(rows)
        print(f"\nwrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
