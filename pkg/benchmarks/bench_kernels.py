"""Benchmark the compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
Both backends are imported directly, so results do not depend on the
LQGLAB_PURE_PYTHON environment variable.
"""
import time

import numpy as np

from lqglab._kernels import _reference

try:
    from lqglab._kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_srw_bench(backend):
    rng = np.random.default_rng(0)
    dirs = rng.integers(0, 4, size=2_000_000, dtype=np.uint8)
    return lambda: backend.srw_advance(dirs, 0, 0, 256 * 256)


def make_wos_bench(backend, n=128, walkers=4096, steps=128):
    rng = np.random.default_rng(1)
    m = 2 * n
    ax = (np.arange(m) + 0.5) / n - 1.0
    X, Y = np.meshgrid(ax, ax, indexing="ij")
    dist = np.maximum(np.hypot(X, Y) - 0.2, 0.0)
    r = 0.55 + 0.35 * rng.random(walkers)
    th0 = 2 * np.pi * rng.random(walkers)
    theta = 2 * np.pi * rng.random((walkers, steps))
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    def run():
        px, py = r * np.cos(th0), r * np.sin(th0)
        status = np.zeros(walkers, dtype=np.int8)
        backend.wos_advance(
            px, py, status, dist, -1.0, 1.0 / n, 0.75 / n, 2.0 / n, 2.0 / n,
            cos_t, sin_t,
        )

    return run


BENCHES = [
    ("srw_advance (2e6 steps)", make_srw_bench),
    ("wos_advance (4096 walkers x 128 steps)", make_wos_bench),
]


def main():
    print(f"{'kernel':<42}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, make in BENCHES:
        t_ref = timeit(make(_reference))
        if _fast is None:
            print(f"{name:<42}{t_ref * 1e3:>10.2f}ms{'n/a':>12}{'n/a':>10}")
            continue
        t_fast = timeit(make(_fast))
        print(
            f"{name:<42}{t_ref * 1e3:>10.2f}ms{t_fast * 1e3:>10.2f}ms"
            f"{t_ref / t_fast:>9.1f}x"
        )


if __name__ == "__main__":
    main()
