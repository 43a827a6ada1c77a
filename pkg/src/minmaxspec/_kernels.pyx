# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; see ``_pykernels`` for the contracts."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()

NAME = "cython"


cdef inline double _row_dot(const double[:, ::1] rows, Py_ssize_t r,
                            const double[::1] v) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(rows.shape[1]):
        s += rows[r, j] * v[j]
    return s


def apply_rows(const double[:, ::1] rows, const cnp.intp_t[::1] offsets,
               const double[::1] v, bint maximize):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef Py_ssize_t i, r
    cdef double best, val
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            best = _row_dot(rows, offsets[i], v)
            for r in range(offsets[i] + 1, offsets[i + 1]):
                val = _row_dot(rows, r, v)
                if (val > best) if maximize else (val < best):
                    best = val
            o[i] = best
    return out


cdef inline double _log_row(const double[:, ::1] logw, Py_ssize_t r,
                            const double[::1] logv) noexcept nogil:
    cdef Py_ssize_t j, m = logw.shape[1]
    cdef double top = -INFINITY
    cdef double t, s
    for j in range(m):
        t = logw[r, j] + logv[j]
        if t > top:
            top = t
    if top == -INFINITY:
        return top
    s = 0.0
    for j in range(m):
        t = logw[r, j] + logv[j]
        if t != -INFINITY:
            s += exp(t - top)
    return top + log(s)


cdef void _log_step(const double[:, ::1] logw, const cnp.intp_t[::1] offsets,
                    const double[::1] cur, double[::1] nxt,
                    bint maximize) noexcept nogil:
    cdef Py_ssize_t i, r
    cdef double best, val
    for i in range(offsets.shape[0] - 1):
        best = _log_row(logw, offsets[i], cur)
        for r in range(offsets[i] + 1, offsets[i + 1]):
            val = _log_row(logw, r, cur)
            if (val > best) if maximize else (val < best):
                best = val
        nxt[i] = best


def _log_weights(rows):
    logw = np.full(np.shape(rows), -np.inf)
    np.log(rows, out=logw, where=np.asarray(rows) > 0)
    return logw


def log_apply(rows, const cnp.intp_t[::1] offsets, const double[::1] logv,
              bint maximize):
    cdef double[:, ::1] logw = _log_weights(rows)
    out = np.empty(offsets.shape[0] - 1)
    cdef double[::1] o = out
    with nogil:
        _log_step(logw, offsets, logv, o, maximize)
    return out


def log_trace(rows, const cnp.intp_t[::1] offsets, const double[::1] logv0,
              Py_ssize_t steps, bint maximize):
    cdef double[:, ::1] logw = _log_weights(rows)
    cdef Py_ssize_t n = logv0.shape[0]
    cdef Py_ssize_t k
    out = np.empty((steps + 1, n))
    cdef double[:, ::1] o = out
    o[0, :] = logv0
    with nogil:
        for k in range(1, steps + 1):
            _log_step(logw, offsets, o[k - 1], o[k], maximize)
    return out


def perron_iterate(const double[:, ::1] A, double tol, Py_ssize_t max_iter):
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j, it = 0
    cdef double lo = 0.0, hi = INFINITY, r, s, top
    x_arr = np.ones(n)
    ax_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef double[::1] ax = ax_arr
    with nogil:
        while it < max_iter:
            it += 1
            lo = INFINITY
            hi = -INFINITY
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += A[i, j] * x[j]
                ax[i] = s
                r = s / x[i]
                if r < lo:
                    lo = r
                if r > hi:
                    hi = r
            if hi - lo <= tol * hi:
                break
            top = 0.0
            for i in range(n):
                x[i] = ax[i] + x[i]
                if x[i] > top:
                    top = x[i]
            for i in range(n):
                x[i] /= top
    x_arr /= x_arr.max()
    return lo, hi, x_arr, it
