# cython: boundscheck=False, wraparound=False, cdivision=True
"""Fused jet-activation kernels (compiled core).

Same contracts as ``_kernels_py``; one pass over memory per call instead
of one pass per channel expression.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh, sin, cos

cnp.import_array()


def tanh_jet_fwd(double[:, ::1] x, int d):
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t j
    cdef int i
    cdef double tv, s, g
    out_arr = np.empty((x.shape[0], m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for j in range(m):
        tv = tanh(x[0, j])
        s = 1.0 - tv * tv
        out[0, j] = tv
        for i in range(d):
            g = x[1 + i, j]
            out[1 + i, j] = s * g
            out[1 + d + i, j] = s * x[1 + d + i, j] - 2.0 * tv * s * g * g
    return out_arr


def tanh_jet_bwd(double[:, ::1] x, double[:, ::1] y, double[:, ::1] bar, int d):
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t j
    cdef int i
    cdef double tv, s, g, h, bg, bh, av
    ax_arr = np.empty((x.shape[0], m), dtype=np.float64)
    cdef double[:, ::1] ax = ax_arr
    for j in range(m):
        tv = y[0, j]
        s = 1.0 - tv * tv
        av = bar[0, j] * s
        for i in range(d):
            g = x[1 + i, j]
            h = x[1 + d + i, j]
            bg = bar[1 + i, j]
            bh = bar[1 + d + i, j]
            av = av - 2.0 * tv * s * (bg * g + bh * h) \
                 - 2.0 * s * (s - 2.0 * tv * tv) * bh * g * g
            ax[1 + i, j] = bg * s - 4.0 * tv * s * bh * g
            ax[1 + d + i, j] = bh * s
        ax[0, j] = av
    return ax_arr


def sin_jet_fwd(double[:, ::1] x, int d):
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t j
    cdef int i
    cdef double sv, cv, g
    out_arr = np.empty((x.shape[0], m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for j in range(m):
        sv = sin(x[0, j])
        cv = cos(x[0, j])
        out[0, j] = sv
        for i in range(d):
            g = x[1 + i, j]
            out[1 + i, j] = cv * g
            out[1 + d + i, j] = cv * x[1 + d + i, j] - sv * g * g
    return out_arr


def sin_jet_bwd(double[:, ::1] x, double[:, ::1] y, double[:, ::1] bar, int d):
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t j
    cdef int i
    cdef double sv, cv, g, h, bg, bh, av
    ax_arr = np.empty((x.shape[0], m), dtype=np.float64)
    cdef double[:, ::1] ax = ax_arr
    for j in range(m):
        sv = y[0, j]
        cv = cos(x[0, j])
        av = bar[0, j] * cv
        for i in range(d):
            g = x[1 + i, j]
            h = x[1 + d + i, j]
            bg = bar[1 + i, j]
            bh = bar[1 + d + i, j]
            av = av - sv * bg * g - bh * (sv * h + cv * g * g)
            ax[1 + i, j] = bg * cv - 2.0 * sv * bh * g
            ax[1 + d + i, j] = bh * cv
        ax[0, j] = av
    return ax_arr
