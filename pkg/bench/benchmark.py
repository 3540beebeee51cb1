"""Compare the compiled and pure-numpy kernels on the simulator's hot loop.

    python3 bench/benchmark.py [--n 20000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from chibar import kernels
from chibar.conegeom import build_cone
from chibar.numkit import equicorrelation


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    try:
        compiled = kernels.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return
    python = kernels.get_backend("python")

    print(f"{'K':>3} {'m':>3} {'n':>7} {'compiled s':>11} {'python s':>10} {'speedup':>8}  max|diff|")
    rng = np.random.default_rng(0)
    for k, m in ((4, 1), (7, 3), (10, 5)):
        cone = build_cone(equicorrelation(k, 0.5))
        G = np.ascontiguousarray(cone.gram)
        C = np.ascontiguousarray(rng.standard_normal((args.n, k)) @ cone.generators)
        null = np.zeros(k, dtype=np.int32)
        null[k - m:] = 1
        tc, rc = _time(lambda: compiled.lrs_batch(G, C, null, 10 * k), args.repeat)
        tp, rp = _time(lambda: python.lrs_batch(G, C, null, 10 * k), args.repeat)
        diff = float(np.max(np.abs(rc[0] - rp[0])))
        print(f"{k:>3} {m:>3} {args.n:>7} {tc:>11.4f} {tp:>10.4f} {tp / tc:>7.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
