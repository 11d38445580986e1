"""Compiled versus pure-Python kernel timings.

Run with ``python benchmarks/bench_kernels.py [--repeat R]``. Prints one row
per case with the best-of-R time of each backend and the speed-up.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from qtmsradar import _kernels_py as pure
from qtmsradar.bessel import bessel_k_ratio

try:
    from qtmsradar import _ckernels as compiled
except ImportError:  # pragma: no cover
    compiled = None


def _series_args(n, rho, t):
    a = 4.0 * t / (1.0 - rho * rho)
    return (float(n), rho, a, rho * a, 0.0, bessel_k_ratio(n, a), 0.0, 1e-17, 1_000_000)


def cases():
    rng = np.random.default_rng(0)
    for n in (64, 1024, 65_536):
        x = rng.standard_normal((n, 4))
        yield f"window_stats N={n}", lambda m, x=x: m.window_stats(x)
    batch = rng.standard_normal((256, 256, 4))
    yield "batch_window_stats 256x256", lambda m: m.batch_window_stats(batch)
    for n, rho, t in ((16, 0.2, 4.0), (1000, 0.05, 30.0), (100_000, 0.01, 180.0), (100_000, 0.3, 2000.0)):
        args = _series_args(n, rho, t)
        yield f"log_series_sum N={n} rho={rho}", lambda m, args=args: m.log_series_sum(*args)


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled kernels not built; nothing to compare")
        return 1
    print(f"{'case':<38} {'python':>12} {'compiled':>12} {'speed-up':>9}")
    for name, fn in cases():
        tp = best_time(lambda: fn(pure), args.repeat)
        tc = best_time(lambda: fn(compiled), args.repeat)
        print(f"{name:<38} {tp * 1e6:>10.1f}us {tc * 1e6:>10.1f}us {tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
