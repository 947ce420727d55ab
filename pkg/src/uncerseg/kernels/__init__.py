"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set UNCERSEG_PURE_PYTHON=1 to force the numpy backend even when the
compiled extension is installed. The active backend is reported in
BACKEND. Both backends implement the same contracts; compiled results
may differ from the numpy ones by floating-point rounding in the last
couple of ulps (libm vs numpy transcendentals), never more.
"""

import os

import numpy as np

if os.environ.get("UNCERSEG_PURE_PYTHON") == "1":
    from . import _purepy as _impl
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        from . import _purepy as _impl

BACKEND = _impl.NAME


def entropy(values):
    """Element-wise binary entropy (base 2) of an array in [0, 1]."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    flat = _impl.entropy(arr.reshape(-1))
    return np.asarray(flat).reshape(arr.shape)


def oracle_probs(gt, box, points, a1, a0, e_out, b_p, rho):
    """Synthetic backend probabilities; see _purepy.oracle_probs."""
    gt_arr = np.ascontiguousarray(gt, dtype=np.uint8)
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    x0, y0, x1, y1 = (float(c) for c in box)
    out = _impl.oracle_probs(gt_arr, x0, y0, x1, y1, pts,
                             float(a1), float(a0), float(e_out),
                             float(b_p), float(rho))
    return np.asarray(out)


def mask_counts(pred, gt):
    """(intersection, |pred|, |gt|) for two {0,1} arrays of equal shape."""
    p = np.ascontiguousarray(pred, dtype=np.uint8).reshape(-1)
    g = np.ascontiguousarray(gt, dtype=np.uint8).reshape(-1)
    return _impl.mask_counts(p, g)


def topk_greedy(values, order, width, k, d_min):
    """Greedy spaced top-k over pre-sorted flat indices; see _purepy."""
    v = np.ascontiguousarray(values, dtype=np.float64).reshape(-1)
    o = np.ascontiguousarray(order, dtype=np.int64)
    return np.asarray(_impl.topk_greedy(v, o, int(width), int(k), int(d_min)))
