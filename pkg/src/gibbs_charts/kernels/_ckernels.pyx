# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the loops in ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, floor, M_PI

cnp.import_array()


def adjoint_step(const double[:] weights, const double[:] nu,
                 const long long[:] tail, const long long[:] parent, Py_ssize_t n_prev):
    cdef Py_ssize_t i, n = weights.shape[0], m = nu.shape[0]
    cdef double[:] marg = np.zeros(n_prev)
    out_arr = np.empty(n)
    cdef double[:] out = out_arr
    for i in range(m):
        marg[parent[i]] += nu[i]
    for i in range(n):
        out[i] = weights[i] * marg[tail[i]]
    return out_arr


def transfer_step(const double[:] weights, const double[:] g,
                  const long long[:] tail, const long long[:] parent, Py_ssize_t n_prev):
    cdef Py_ssize_t i, n = weights.shape[0], m = parent.shape[0]
    cdef double[:] acc = np.zeros(n_prev)
    out_arr = np.empty(m)
    cdef double[:] out = out_arr
    for i in range(n):
        acc[tail[i]] += weights[i] * g[i]
    for i in range(m):
        out[i] = acc[parent[i]]
    return out_arr


def trig_eval(xy_in, freqs_in, a_in, b_in, double const):
    cdef double[:, :] xy = np.ascontiguousarray(xy_in, dtype=np.float64)
    cdef long long[:, :] freqs = np.ascontiguousarray(freqs_in, dtype=np.int64)
    cdef double[:] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[:] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t i, t, n = xy.shape[0], nt = freqs.shape[0]
    cdef double th, acc
    out_arr = np.empty(n)
    cdef double[:] out = out_arr
    for i in range(n):
        acc = const
        for t in range(nt):
            th = 2.0 * M_PI * (xy[i, 0] * freqs[t, 0] + xy[i, 1] * freqs[t, 1])
            acc += a[t] * cos(th) + b[t] * sin(th)
        out[i] = acc
    return out_arr


def stable_series(base_in, offsets_in, direction_in, double lam, matrix_in,
                  int n_terms, freqs_in, a_in, b_in):
    cdef double[:, :] base = np.ascontiguousarray(base_in, dtype=np.float64)
    cdef double[:] offsets = np.ascontiguousarray(offsets_in, dtype=np.float64)
    cdef double[:] direction = np.ascontiguousarray(direction_in, dtype=np.float64)
    cdef double[:, :] m = np.ascontiguousarray(matrix_in, dtype=np.float64)
    cdef long long[:, :] freqs = np.ascontiguousarray(freqs_in, dtype=np.int64)
    cdef double[:] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[:] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t i, k, t, n = base.shape[0], nt = freqs.shape[0]
    cdef double x, y, nx, ny, d, th, dl, acc
    cdef double[:] kdir = np.empty(nt)
    for t in range(nt):
        kdir[t] = 2.0 * M_PI * (freqs[t, 0] * direction[0] + freqs[t, 1] * direction[1])
    out_arr = np.empty(n)
    cdef double[:] out = out_arr
    for i in range(n):
        x = base[i, 0] - floor(base[i, 0])
        y = base[i, 1] - floor(base[i, 1])
        d = offsets[i]
        acc = 0.0
        for k in range(n_terms):
            for t in range(nt):
                th = 2.0 * M_PI * (x * freqs[t, 0] + y * freqs[t, 1])
                dl = kdir[t] * d
                acc += a[t] * (cos(th + dl) - cos(th)) + b[t] * (sin(th + dl) - sin(th))
            nx = m[0, 0] * x + m[0, 1] * y
            ny = m[1, 0] * x + m[1, 1] * y
            x = nx - floor(nx)
            y = ny - floor(ny)
            d *= lam
        out[i] = acc
    return out_arr
