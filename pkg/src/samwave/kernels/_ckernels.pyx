# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled periodic filtering loops (axis 0 of a C-contiguous 2-D array)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def analysis(const double[:, ::1] x, const double[::1] lo, const double[::1] hi):
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1], half = n // 2
    cdef Py_ssize_t nl = lo.shape[0], nh = hi.shape[0]
    cdef Py_ssize_t i, k, j, src
    cdef double w
    lo_out = np.zeros((half, m), dtype=np.float64)
    hi_out = np.zeros((half, m), dtype=np.float64)
    cdef double[:, ::1] a = lo_out
    cdef double[:, ::1] d = hi_out
    for i in range(half):
        for k in range(nl):
            src = (2 * i + k) % n
            w = lo[k]
            for j in range(m):
                a[i, j] += w * x[src, j]
        for k in range(nh):
            src = (2 * i + k) % n
            w = hi[k]
            for j in range(m):
                d[i, j] += w * x[src, j]
    return lo_out, hi_out


def synthesis(const double[:, ::1] c_lo, const double[:, ::1] c_hi,
              const double[::1] rec_lo, const double[::1] rec_hi):
    cdef Py_ssize_t half = c_lo.shape[0], m = c_lo.shape[1], n = 2 * half
    cdef Py_ssize_t nl = rec_lo.shape[0], nh = rec_hi.shape[0]
    cdef Py_ssize_t i, k, j, dst
    cdef double w
    out = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] y = out
    for i in range(half):
        for k in range(nl):
            dst = (2 * i + nl - 1 - k) % n
            w = rec_lo[k]
            for j in range(m):
                y[dst, j] += w * c_lo[i, j]
        for k in range(nh):
            dst = (2 * i + nh - 1 - k) % n
            w = rec_hi[k]
            for j in range(m):
                y[dst, j] += w * c_hi[i, j]
    return out


def circular_filter(const double[:, ::1] x, const double[::1] h):
    cdef Py_ssize_t n = x.shape[0], m = x.shape[1], nt = h.shape[0]
    cdef Py_ssize_t c = (nt - 1) // 2
    cdef Py_ssize_t i, k, j, src
    cdef double w
    out = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] y = out
    for i in range(n):
        for k in range(nt):
            src = (i + k - c) % n
            if src < 0:
                src += n
            w = h[k]
            for j in range(m):
                y[i, j] += w * x[src, j]
    return out
