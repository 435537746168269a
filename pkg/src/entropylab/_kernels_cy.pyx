# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: entropy accumulation and grouped pair sums.

Signature-compatible with ``_kernels_py``; selected by ``entropylab.backend``
when built.  ``neg_xlogx_sum`` uses Kahan compensation, so both backends
agree to within a few ulps even on multi-million-term sums.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log

cnp.import_array()


def neg_xlogx_sum(w):
    """Sum of -w*ln(w) over strictly positive entries -> (total, abs_total)."""
    cdef const double[::1] data = np.ascontiguousarray(w, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = data.shape[0]
    cdef double x, term, y, t
    cdef double s = 0.0, comp = 0.0
    cdef double sa = 0.0, compa = 0.0
    for i in range(n):
        x = data[i]
        if x > 0.0:
            term = -x * log(x)
            y = term - comp
            t = s + y
            comp = (t - s) - y
            s = t
            y = fabs(term) - compa
            t = sa + y
            compa = (t - sa) - y
            sa = t
    return s, sa


cdef _compress_dense(double[::1] acc, Py_ssize_t size):
    cdef Py_ssize_t i, m = 0
    for i in range(size):
        if acc[i] != 0.0:
            m += 1
    out_k = np.empty(m, dtype=np.int64)
    out_v = np.empty(m, dtype=np.float64)
    cdef long long[::1] kv = out_k
    cdef double[::1] vv = out_v
    m = 0
    for i in range(size):
        if acc[i] != 0.0:
            kv[m] = i
            vv[m] = acc[i]
            m += 1
    return out_k, out_v


cdef _segment_sum(cnp.ndarray keys_arr, cnp.ndarray vals_arr):
    order = np.argsort(keys_arr, kind="stable")
    cdef const long long[::1] ks = np.ascontiguousarray(keys_arr[order])
    cdef const double[::1] vs = np.ascontiguousarray(vals_arr[order])
    cdef Py_ssize_t i, n = ks.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    out_k = np.empty(n, dtype=np.int64)
    out_v = np.empty(n, dtype=np.float64)
    cdef long long[::1] kv = out_k
    cdef double[::1] vv = out_v
    cdef Py_ssize_t m = 0
    cdef long long cur = ks[0]
    cdef double acc = vs[0]
    for i in range(1, n):
        if ks[i] == cur:
            acc += vs[i]
        else:
            kv[m] = cur
            vv[m] = acc
            m += 1
            cur = ks[i]
            acc = vs[i]
    kv[m] = cur
    vv[m] = acc
    m += 1
    return out_k[:m].copy(), out_v[:m].copy()


def group_sum(keys, vals, size=0):
    """Sum ``vals`` grouped by int64 ``keys``; returns (unique_keys, sums)."""
    cdef cnp.ndarray keys_arr = np.ascontiguousarray(keys, dtype=np.int64)
    cdef cnp.ndarray vals_arr = np.ascontiguousarray(vals, dtype=np.float64)
    cdef Py_ssize_t dense = int(size)
    cdef const long long[::1] kview
    cdef const double[::1] vview
    cdef double[::1] accview
    cdef Py_ssize_t i, n
    if dense > 0:
        acc = np.zeros(dense, dtype=np.float64)
        accview = acc
        kview = keys_arr
        vview = vals_arr
        n = kview.shape[0]
        for i in range(n):
            accview[kview[i]] += vview[i]
        return _compress_dense(accview, dense)
    return _segment_sum(keys_arr, vals_arr)


def pair_accumulate(kp, mp, kq, mq, size=0):
    """Accumulate the outer pair sums kp[i]+kq[j] with weights mp[i]*mq[j]."""
    cdef const long long[::1] a = np.ascontiguousarray(kp, dtype=np.int64)
    cdef const long long[::1] b = np.ascontiguousarray(kq, dtype=np.int64)
    cdef const double[::1] wa = np.ascontiguousarray(mp, dtype=np.float64)
    cdef const double[::1] wb = np.ascontiguousarray(mq, dtype=np.float64)
    cdef Py_ssize_t i, j, n = a.shape[0], m = b.shape[0]
    cdef Py_ssize_t dense = int(size)
    cdef double[::1] accview
    cdef long long ka
    cdef double wi
    if dense > 0:
        acc = np.zeros(dense, dtype=np.float64)
        accview = acc
        for i in range(n):
            ka = a[i]
            wi = wa[i]
            for j in range(m):
                accview[ka + b[j]] += wi * wb[j]
        return _compress_dense(accview, dense)
    keys = np.empty(n * m, dtype=np.int64)
    vals = np.empty(n * m, dtype=np.float64)
    cdef long long[::1] kout = keys
    cdef double[::1] vout = vals
    cdef Py_ssize_t pos = 0
    for i in range(n):
        ka = a[i]
        wi = wa[i]
        for j in range(m):
            kout[pos] = ka + b[j]
            vout[pos] = wi * wb[j]
            pos += 1
    return _segment_sum(keys, vals)
