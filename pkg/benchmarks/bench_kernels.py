"""Timing comparison of the compiled and pure-numpy kernel backends.

Run as a script::

    python benchmarks/bench_kernels.py [--repeat 5]

Imports both implementations directly (ignoring the selection logic),
times the three hot kernels on representative sizes, and prints a small
table with the speedup of the compiled path.  The compiled module may be
absent — the script then reports the fallback timings only.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import entropylab._kernels_py as kpy

try:
    import entropylab._kernels_cy as kcy
except ImportError:
    kcy = None


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def make_cases(rng: np.random.Generator):
    weights = rng.dirichlet(np.ones(1 << 22))
    kp = rng.integers(-4000, 4000, size=2048)
    mp = rng.dirichlet(np.ones(2048))
    kq = rng.integers(-4000, 4000, size=2048)
    mq = rng.dirichlet(np.ones(2048))
    keys = rng.integers(0, 1 << 16, size=1 << 22)
    vals = rng.random(1 << 22)
    shift = 4000
    span = 2 * 8000 + 1
    return [
        ("neg_xlogx_sum 4M", lambda mod: mod.neg_xlogx_sum(weights)),
        (
            "pair_accumulate 2048x2048 sort",
            lambda mod: mod.pair_accumulate(kp, mp, kq, mq),
        ),
        (
            "pair_accumulate 2048x2048 dense",
            lambda mod: mod.pair_accumulate(kp + shift, mp, kq + shift, mq, size=span),
        ),
        ("group_sum 4M sort", lambda mod: mod.group_sum(keys, vals)),
        ("group_sum 4M dense", lambda mod: mod.group_sum(keys, vals, size=1 << 16)),
    ]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="best-of-N timing")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    cases = make_cases(rng)

    width = max(len(name) for name, _ in cases)
    if kcy is None:
        print("compiled backend not built; timing the numpy fallback only")
        for name, call in cases:
            t = _best_of(lambda: call(kpy), args.repeat)
            print(f"{name:<{width}}  python {t * 1e3:8.2f} ms")
        return

    print(f"{'kernel':<{width}}  {'python':>10}  {'cython':>10}  speedup")
    for name, call in cases:
        tp = _best_of(lambda: call(kpy), args.repeat)
        tc = _best_of(lambda: call(kcy), args.repeat)
        print(
            f"{name:<{width}}  {tp * 1e3:8.2f} ms  {tc * 1e3:8.2f} ms  {tp / tc:6.2f}x"
        )


if __name__ == "__main__":
    main()
