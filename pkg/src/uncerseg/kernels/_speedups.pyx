# cython: language_level=3
"""Compiled twins of the kernels in _purepy, dispatched at import time."""

from libc.math cimport exp, fabs, log2

import numpy as np

NAME = "compiled"


def entropy(const double[::1] values):
    cdef Py_ssize_t n = values.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double p, e
    for i in range(n):
        p = values[i]
        if p > 0.0 and p < 1.0:
            e = -(p * log2(p) + (1.0 - p) * log2(1.0 - p))
            out[i] = e if e < 1.0 else 1.0
    return out_arr


def oracle_probs(const unsigned char[:, ::1] gt,
                 double x0, double y0, double x1, double y1,
                 const double[:, ::1] points,
                 double a1, double a0, double e_out, double b_p, double rho):
    cdef Py_ssize_t h = gt.shape[0]
    cdef Py_ssize_t w = gt.shape[1]
    cdef Py_ssize_t m = points.shape[0]
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double inv = 0.0
    if m:
        inv = 1.0 / (2.0 * rho * rho)
    cdef Py_ssize_t y, x, j
    cdef double cx, cy, box_m, g, val, boost, dx, dy
    for y in range(h):
        cy = y + 0.5
        for x in range(w):
            cx = x + 0.5
            if cx >= x0 and cx <= x1 and cy >= y0 and cy <= y1:
                box_m = 1.0
            else:
                box_m = e_out
            g = 1.0 if gt[y, x] else 0.0
            val = box_m * (a1 * g + a0 * (1.0 - g))
            if m and g != 0.0:
                boost = 0.0
                for j in range(m):
                    dx = cx - points[j, 0]
                    dy = cy - points[j, 1]
                    boost += b_p * exp(-(dx * dx + dy * dy) * inv)
                val += boost
            if val < 0.0:
                val = 0.0
            elif val > 1.0:
                val = 1.0
            out[y, x] = val
    return out_arr


def mask_counts(const unsigned char[::1] pred, const unsigned char[::1] gt):
    cdef Py_ssize_t n = pred.shape[0]
    cdef long long inter = 0, ps = 0, gs = 0
    cdef Py_ssize_t i
    cdef unsigned char p, g
    for i in range(n):
        p = pred[i]
        g = gt[i]
        inter += p & g
        ps += p
        gs += g
    return int(inter), int(ps), int(gs)


cdef inline long long _cheb(long long dx, long long dy) noexcept:
    if dx < 0:
        dx = -dx
    if dy < 0:
        dy = -dy
    return dx if dx > dy else dy


def topk_greedy(const double[::1] values, const long long[::1] order,
                Py_ssize_t width, Py_ssize_t k, Py_ssize_t d_min):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t cap = k if k < n else n
    chosen_arr = np.empty(cap, dtype=np.int64)
    xs_arr = np.empty(cap, dtype=np.int64)
    ys_arr = np.empty(cap, dtype=np.int64)
    cdef long long[::1] chosen = chosen_arr
    cdef long long[::1] xs = xs_arr
    cdef long long[::1] ys = ys_arr
    cdef Py_ssize_t taken = 0, i, j
    cdef long long idx, x, y
    cdef bint ok
    for i in range(n):
        if taken >= k:
            break
        idx = order[i]
        y = idx // width
        x = idx - y * width
        ok = True
        for j in range(taken):
            if _cheb(x - xs[j], y - ys[j]) < d_min:
                ok = False
                break
        if ok:
            chosen[taken] = idx
            xs[taken] = x
            ys[taken] = y
            taken += 1
    return chosen_arr[:taken].copy()
