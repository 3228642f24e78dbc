"""Time the ultrametric kernels with numba against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 32 64 128] [--reps 20]

Both paths are checked for identical results before timing.  The numba
column excludes compilation (one warm-up call per kernel).
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from scatord import _kernels
from scatord.ultrametric import prop1_order, random_ultra


def _best(fn, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 128])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    a = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy column is meaningful")
    rng = random.Random(a.seed)
    print(f"{'n':>5} {'kernel':<20} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in a.sizes:
        m = random_ultra(n, rng)
        R, vals = m.ranks()
        depth = max(1, len(vals))
        r = prop1_order(m, use_numba=False)
        pos_of = r.position()
        pos = np.array([pos_of[x] for x in m.points], dtype=np.int64)
        lab = np.ascontiguousarray(r.tree.labels)
        cases = {
            "triangle_violations": lambda nb: _kernels.triangle_violations(R, nb),
            "level_labels": lambda nb: _kernels.level_labels(R, depth, nb),
            "interval_failures": lambda nb: _kernels.interval_failures(lab, pos, nb),
            "order_failures": lambda nb: _kernels.order_failures(lab, pos, nb),
        }
        for name, fn in cases.items():
            t_np = _best(lambda: fn(False), a.reps)
            if _kernels.HAVE_NUMBA:
                ref, got = fn(False), fn(True)
                assert np.array_equal(np.asarray(ref), np.asarray(got)), name
                t_nb = _best(lambda: fn(True), a.reps)
                print(f"{n:>5} {name:<20} {t_np * 1e3:>10.3f} {t_nb * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")
            else:
                print(f"{n:>5} {name:<20} {t_np * 1e3:>10.3f} {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
