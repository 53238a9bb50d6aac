"""Compare the compiled and pure-Python graph kernels.

Run with ``python benchmarks/bench_kernels.py``. Both backends are imported
directly, so the comparison works whichever one the package selected.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from harmonic_lr._kernels import _pykernels
from harmonic_lr.graph import UNREACHABLE, cubic, ring

try:
    from harmonic_lr._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, g, repeat):
    adj = g.adjacency.astype(bool)
    indptr = np.concatenate([[0], np.cumsum(adj.sum(axis=1))]).astype(np.int64)
    indices = np.nonzero(adj)[1].astype(np.int64)
    max_r = int(g.diameter)
    rows = []
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    results = {}
    for label, mod in backends:
        t_bfs, dist = _best_of(lambda: mod.all_pairs_bfs(indptr, indices, g.n, UNREACHABLE), repeat)
        t_sph, _ = _best_of(lambda: mod.sphere_counts(dist, max_r), repeat)
        results[label] = dist
        rows.append((name, label, t_bfs, t_sph))
    if len(results) == 2:
        assert np.array_equal(results["python"], results["cython"]), "backends disagree"
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    cases = [("ring(2000)", ring(2000)), ("cubic(32, 2)", cubic(32, 2)), ("cubic(10, 3)", cubic(10, 3))]
    print(f"{'graph':<14}{'backend':<9}{'bfs [s]':>10}{'spheres [s]':>13}")
    for name, g in cases:
        rows = bench(name, g, args.repeat)
        for _, label, t_bfs, t_sph in rows:
            print(f"{name:<14}{label:<9}{t_bfs:>10.4f}{t_sph:>13.4f}")
        if len(rows) == 2:
            print(f"{'':<14}{'speedup':<9}{rows[0][2] / rows[1][2]:>10.1f}{rows[0][3] / rows[1][3]:>13.1f}")


if __name__ == "__main__":
    main()
