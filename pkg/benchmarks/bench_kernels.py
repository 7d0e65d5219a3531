"""Compare the compiled and pure-Python rank kernels.

    python3 benchmarks/bench_kernels.py [--reps N] [--sizes 4,8,16]
"""

from __future__ import annotations

import argparse
import random
import time

from quaternity import GF, HQ, QQ, kernels
from quaternity.harness import gen_matrix


def _time(fn, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--sizes", default="4,8,16,24")
    ap.add_argument("--batch", type=int, default=20)
    args = ap.parse_args()
    if not kernels.COMPILED_AVAILABLE:
        print("compiled kernels unavailable; rebuild with `pip install -e . --no-build-isolation`")
        return
    rng = random.Random(0)
    print(f"{'ring':6s} {'n':>4s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for ring in (GF(2), GF(7), QQ, HQ):
        for n in map(int, args.sizes.split(",")):
            mats = [gen_matrix(ring, n, n, rng) for _ in range(args.batch)]

            def run():
                for m in mats:
                    kernels.rank_rows(ring, m.data, m.cols)

            timings = {}
            for name in ("python", "cython"):
                with kernels.using_backend(name):
                    timings[name] = _time(run, args.reps) / args.batch * 1e3
            with kernels.using_backend("python"):
                ref = [kernels.rank_rows(ring, m.data, m.cols) for m in mats]
            with kernels.using_backend("cython"):
                assert ref == [kernels.rank_rows(ring, m.data, m.cols) for m in mats]
            print(f"{ring.label:6s} {n:4d} {timings['python']:10.3f} {timings['cython']:10.3f} "
                  f"{timings['python'] / timings['cython']:7.1f}x")


if __name__ == "__main__":
    main()
