"""Benchmark: compiled kernel lane vs pure-numpy fallback.

Times the three collocation-product kernels on a range of grid sizes, and
the full right-hand-side / time-step path with each lane spliced in.

Run:  python3 benchmarks/bench_kernels.py [--sizes 64,128,256] [--repeats 50]
"""

import argparse
import time

import numpy as np

from hallmhd import _kernels_fallback as fb
from hallmhd import kernels
from hallmhd.solver import InitialData, SimConfig, initial_data, step
from hallmhd.spectral import make_grid


def _time(fn, repeats):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


class _FallbackLane:
    """Route the kernels module through the numpy implementations."""

    def __init__(self):
        self.saved = None

    def __enter__(self):
        self.saved = kernels._impl
        kernels._impl = fb

    def __exit__(self, *exc):
        kernels._impl = self.saved


def bench_kernels(sizes, repeats):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14} {'n':>5} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    for n in sizes:
        u = np.ascontiguousarray(rng.normal(size=(3, n, n)))
        b = np.ascontiguousarray(rng.normal(size=(3, n, n)))
        gu = np.ascontiguousarray(rng.normal(size=(2, 3, n, n)))
        gb = np.ascontiguousarray(rng.normal(size=(2, 3, n, n)))
        curlb = np.ascontiguousarray(rng.normal(size=(3, n, n)))
        cases = {
            "cross3": lambda: kernels.cross3(u, b),
            "dot_grad": lambda: kernels.dot_grad(u[:2], gu),
            "rhs_products": lambda: kernels.rhs_products(u, b, gu, gb, curlb),
        }
        for name, fn in cases.items():
            with _FallbackLane():
                t_np = _time(fn, repeats)
            if kernels.HAVE_EXT:
                t_cy = _time(fn, repeats)
                print(f"{name:<14} {n:>5} {t_np * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us "
                      f"{t_np / t_cy:>8.2f}x")
            else:
                print(f"{name:<14} {n:>5} {t_np * 1e6:>10.1f}us {'(no ext)':>12} {'':>9}")


def bench_step(sizes, repeats):
    print(f"\n{'full step':<14} {'n':>5} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    for n in sizes:
        grid = make_grid(2, n)
        st = initial_data(InitialData(recipe="random_band", seed=1,
                                      u_amplitude=0.75, b_amplitude=0.11), grid)
        SimConfig(n=n)  # validates n

        def one_step():
            step(st, 1e-4, alpha=1.0)

        with _FallbackLane():
            t_np = _time(one_step, max(3, repeats // 10))
        if kernels.HAVE_EXT:
            t_cy = _time(one_step, max(3, repeats // 10))
            print(f"{'ifrk4 step':<14} {n:>5} {t_np * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms "
                  f"{t_np / t_cy:>8.2f}x")
        else:
            print(f"{'ifrk4 step':<14} {n:>5} {t_np * 1e3:>10.2f}ms {'(no ext)':>12}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="64,128,256",
                        help="comma-separated grid sizes")
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"active lane: {kernels.active_lane()}")
    bench_kernels(sizes, args.repeats)
    bench_step(sizes, args.repeats)


if __name__ == "__main__":
    main()
