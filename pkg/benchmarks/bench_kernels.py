"""Time the compiled kernels against the pure-Python fallback.

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py [--size 512] [--repeats 5]

Each kernel is timed on identical inputs under both implementations;
results must agree before a timing is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from uncerseg.kernels import _purepy

try:
    from uncerseg.kernels import _speedups
except ImportError:
    _speedups = None


def _best_of(repeats: int, fn, *args) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(size: int):
    rng = np.random.default_rng(0)
    probs = rng.random(size * size)
    gt = (rng.random((size, size)) < 0.3).astype(np.uint8)
    pred = (rng.random(size * size) < 0.3).astype(np.uint8)
    gt_flat = gt.ravel().copy()
    points = rng.random((8, 2)) * size
    umap = rng.random(size * size)
    order = np.lexsort((np.arange(umap.size), -umap))

    box = (size * 0.2, size * 0.2, size * 0.8, size * 0.8)
    yield "entropy", (probs,)
    yield "oracle_probs", (gt, *box, points, 0.9, 0.15, 0.1, 0.6, size * 0.05)
    yield "mask_counts", (pred, gt_flat)
    yield "topk_greedy", (umap, order, size, 10, 5)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if _speedups is None:
        print("compiled kernels unavailable; nothing to compare")
        return 1

    print(f"arrays {args.size}x{args.size}, best of {args.repeats}")
    print(f"{'kernel':<14} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for name, call_args in _cases(args.size):
        ref = getattr(_purepy, name)(*call_args)
        got = getattr(_speedups, name)(*call_args)
        np.testing.assert_allclose(np.asarray(got), np.asarray(ref), rtol=1e-12, atol=0)
        t_py = _best_of(args.repeats, getattr(_purepy, name), *call_args)
        t_c = _best_of(args.repeats, getattr(_speedups, name), *call_args)
        print(f"{name:<14} {t_py * 1e3:>10.3f}ms {t_c * 1e3:>10.3f}ms "
              f"{t_py / t_c:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
