"""Compare the numba and numpy cell-reduction kernels.

Runs both implementations of cell_sums / cell_max across a range of
sizes and prints a timing table.  Usage:

    python3 benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import timeit

import numpy as np

from amalgam import _kernels


def bench(fn, labels, n_cells, values, repeats):
    fn(labels, n_cells, values)  # warm-up (jit compile, cache touch)
    t = timeit.timeit(lambda: fn(labels, n_cells, values), number=repeats)
    return t / repeats


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels.BACKEND != "numba":
        print("warning: numba backend inactive; both columns use numpy")
    pairs = [
        ("cell_sums", _kernels.cell_sums, _kernels.np_cell_sums),
        ("cell_max", _kernels.cell_max, _kernels.np_cell_max),
    ]

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<10} {'size':>9} {'cells':>7} {'numba (us)':>11} "
          f"{'numpy (us)':>11} {'speedup':>8}")
    for size in (256, 4096, 65536, 1048576):
        n_cells = max(2, size // 64)
        labels = rng.integers(0, n_cells, size=size).astype(np.int64)
        values = rng.standard_normal(size)
        for name, active, fallback in pairs:
            ta = bench(active, labels, n_cells, values, args.repeats)
            tb = bench(fallback, labels, n_cells, values, args.repeats)
            a = active(labels, n_cells, values)
            b = fallback(labels, n_cells, values)
            assert np.allclose(a, b), f"{name} mismatch at size {size}"
            print(f"{name:<10} {size:>9} {n_cells:>7} {ta * 1e6:>11.2f} "
                  f"{tb * 1e6:>11.2f} {tb / ta:>8.2f}x")


if __name__ == "__main__":
    main()
