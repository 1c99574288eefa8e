# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched zonal-series recurrence (hot loop of every kernel sum)."""

import numpy as np
cimport numpy as cnp

BACKEND = "cython"


def zonal_series(coeffs, double nu, w, a2, out=None):
    """Same contract as bbesov._series_py.zonal_series."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a2, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] o
    if out is None:
        o = np.zeros_like(wv)
    else:
        o = out
    cdef Py_ssize_t K = c.shape[0] - 1
    cdef Py_ssize_t N = wv.shape[0]
    cdef Py_ssize_t i, k
    cdef double s_prev, s_cur, s_next, wi, ai, acc, ck
    for i in range(N):
        wi = wv[i]
        ai = av[i]
        s_prev = 1.0
        acc = c[0]
        if K >= 1:
            s_cur = (2.0 * nu + 2.0) * wi
            acc += c[1] * s_cur
            for k in range(2, K + 1):
                if k == 2:
                    ck = 2.0
                else:
                    ck = (k + 2.0 * nu - 2.0) / (k + nu - 2.0)
                s_next = ((k + nu) / k) * (2.0 * wi * s_cur - ck * ai * s_prev)
                acc += c[k] * s_next
                s_prev = s_cur
                s_cur = s_next
        o[i] += acc
    return o
