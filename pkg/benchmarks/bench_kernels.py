"""Benchmark the batch angle kernel: compiled loop vs. vectorized numpy.

Measures best-of-N wall time for each backend over a range of batch
sizes and prints a comparison table. The compiled path is warmed before
timing so JIT compilation is not counted.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 1000,100000 --repeats 9
"""

import argparse
from time import perf_counter

import numpy as np

from kpcurve._kernels import polyline_angles_numba, polyline_angles_numpy

DEFAULT_SIZES = (100, 1_000, 10_000, 100_000, 1_000_000)


def random_batch(size: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=(size, 5, 2))


def best_time(func, batch: np.ndarray, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = perf_counter()
        func(batch)
        best = min(best, perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes",
        default=",".join(str(s) for s in DEFAULT_SIZES),
        help="comma-separated batch sizes",
    )
    parser.add_argument(
        "--repeats", type=int, default=5, help="timing repeats per size (best kept)"
    )
    parser.add_argument("--seed", type=int, default=0, help="batch generator seed")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if polyline_angles_numba is None:
        print("compiled path unavailable (numba disabled or not installed);")
        print("timing the numpy path only\n")

    header = f"{'batch':>10} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'ns/row':>8} {'max diff deg':>13}"
    print(header)
    print("-" * len(header))
    for size in sizes:
        batch = random_batch(size, args.seed)
        if polyline_angles_numba is not None:
            polyline_angles_numba(batch[: min(size, 1000)])  # warm the JIT
        t_numpy = best_time(polyline_angles_numpy, batch, args.repeats)
        if polyline_angles_numba is None:
            print(f"{size:>10} {t_numpy * 1e3:>10.3f} {'-':>10} {'-':>8} {t_numpy / size * 1e9:>8.0f} {'-':>13}")
            continue
        t_numba = best_time(polyline_angles_numba, batch, args.repeats)
        angles_np, bad_np = polyline_angles_numpy(batch)
        angles_nb, bad_nb = polyline_angles_numba(batch)
        assert np.array_equal(bad_np, bad_nb)
        diff = float(np.nanmax(np.abs(angles_np - angles_nb))) if size else 0.0
        print(
            f"{size:>10} {t_numpy * 1e3:>10.3f} {t_numba * 1e3:>10.3f} "
            f"{t_numpy / t_numba:>7.1f}x {t_numba / size * 1e9:>8.0f} {diff:>13.2e}"
        )


if __name__ == "__main__":
    main()
