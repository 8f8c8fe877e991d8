"""Compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gl2lfun import _kernels_py

try:
    from gl2lfun import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(2_000_000)
    w_re, w_im = rng.standard_normal(4000), rng.standard_normal(4000)
    logx = np.log(np.linspace(1.0, 1e4, 2000))
    return [
        ("eta_power(20000, 24)", lambda k: k.eta_power(20000, 24)),
        ("neumaier_sum(2e6)", lambda k: k.neumaier_sum(x)),
        ("phase_line_sum(4000 x 2000)", lambda k: k.phase_line_sum(w_re, w_im, -1000.0, 0.5, logx)),
    ]


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    print(f"{'kernel':32s} {'python [s]':>12s} {'compiled [s]':>13s} {'speedup':>8s}")
    for name, call in cases():
        tp = _best(lambda: call(_kernels_py), args.repeat)
        if compiled is None:
            print(f"{name:32s} {tp:12.4f} {'n/a':>13s} {'n/a':>8s}")
            continue
        tc = _best(lambda: call(compiled), args.repeat)
        print(f"{name:32s} {tp:12.4f} {tc:13.4f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
