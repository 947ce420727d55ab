"""Numpy implementations of the per-pixel hot loops.

This is the reference backend. The compiled backend in _speedups.pyx
implements the same four functions with identical semantics; the
dispatcher in __init__ picks one at import time. Callers go through the
dispatcher wrappers, which normalize dtypes and shapes, so inputs here
are already C-contiguous arrays of the documented dtype.
"""

import numpy as np

NAME = "python"


def entropy(values):
    """Element-wise binary entropy, base 2, with 0*log(0) taken as 0.

    values: 1-d float64 array with entries in [0, 1].
    Returns a new float64 array of the same length, entries in [0, 1].
    """
    out = np.zeros_like(values)
    interior = (values > 0.0) & (values < 1.0)
    p = values[interior]
    out[interior] = -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))
    # guard against >1 by a rounding ulp near p = 0.5
    np.minimum(out, 1.0, out=out)
    return out


def oracle_probs(gt, x0, y0, x1, y1, points, a1, a0, e_out, b_p, rho):
    """Synthetic per-pixel foreground probabilities.

    gt: (H, W) uint8 array over {0, 1}. points: (M, 2) float64 array of
    (x, y) positions. Pixel centers sit at integer + 0.5; a center lies
    inside the box under closed comparison on both edges. The Gaussian
    point boost applies to foreground pixels only.
    """
    h, w = gt.shape
    cx = np.arange(w, dtype=np.float64) + 0.5
    cy = np.arange(h, dtype=np.float64) + 0.5
    in_x = (cx >= x0) & (cx <= x1)
    in_y = (cy >= y0) & (cy <= y1)
    m = np.where(np.outer(in_y, in_x), 1.0, e_out)
    g = gt.astype(np.float64)
    out = m * (a1 * g + a0 * (1.0 - g))
    if points.shape[0]:
        inv = 1.0 / (2.0 * rho * rho)
        xs = cx[None, :]
        ys = cy[:, None]
        boost = np.zeros_like(out)
        for j in range(points.shape[0]):
            d2 = (xs - points[j, 0]) ** 2 + (ys - points[j, 1]) ** 2
            boost += b_p * np.exp(-d2 * inv)
        out += g * boost
    return np.clip(out, 0.0, 1.0)


def mask_counts(pred, gt):
    """(intersection, pred sum, gt sum) over two flat {0,1} uint8 arrays."""
    inter = int(np.sum(pred & gt))
    return inter, int(pred.sum()), int(gt.sum())


def topk_greedy(values, order, width, k, d_min):
    """Greedy top-k pixel selection with a Chebyshev spacing constraint.

    order: flat pixel indices sorted by (value desc, index asc). A
    candidate is skipped when it lies within Chebyshev distance < d_min
    of any already chosen pixel. Returns chosen flat indices (int64,
    at most k) in selection order.
    """
    chosen = []
    coords = []
    for idx in order:
        if len(chosen) >= k:
            break
        y, x = divmod(int(idx), width)
        if all(max(abs(x - px), abs(y - py)) >= d_min for px, py in coords):
            chosen.append(int(idx))
            coords.append((x, y))
    return np.asarray(chosen, dtype=np.int64)
