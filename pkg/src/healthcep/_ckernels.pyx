# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interval and stream kernels; mirrors ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memmove

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline tuple _trim(cnp.ndarray[i64] s, cnp.ndarray[i64] e, Py_ssize_t k):
    return s[:k].copy(), e[:k].copy()


def normalize(starts, ends):
    cdef cnp.ndarray[i64] s_in = np.ascontiguousarray(starts, dtype=np.int64)
    cdef cnp.ndarray[i64] e_in = np.ascontiguousarray(ends, dtype=np.int64)
    cdef Py_ssize_t n = s_in.shape[0]
    if n == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    cdef cnp.ndarray[cnp.intp_t] order = np.lexsort((e_in, s_in))
    cdef cnp.ndarray[i64] out_s = np.empty(n, np.int64)
    cdef cnp.ndarray[i64] out_e = np.empty(n, np.int64)
    cdef Py_ssize_t i, k = 0, idx
    cdef i64 cs = s_in[order[0]], ce = e_in[order[0]], s, e
    for i in range(1, n):
        idx = order[i]
        s = s_in[idx]
        e = e_in[idx]
        if s <= ce:
            if e > ce:
                ce = e
        else:
            out_s[k] = cs
            out_e[k] = ce
            k += 1
            cs = s
            ce = e
    out_s[k] = cs
    out_e[k] = ce
    return _trim(out_s, out_e, k + 1)


def intersect(a_s, a_e, b_s, b_e):
    cdef const i64[::1] as_ = np.ascontiguousarray(a_s, dtype=np.int64)
    cdef const i64[::1] ae = np.ascontiguousarray(a_e, dtype=np.int64)
    cdef const i64[::1] bs = np.ascontiguousarray(b_s, dtype=np.int64)
    cdef const i64[::1] be = np.ascontiguousarray(b_e, dtype=np.int64)
    cdef Py_ssize_t na = as_.shape[0], nb = bs.shape[0]
    cdef cnp.ndarray[i64] out_s = np.empty(na + nb, np.int64)
    cdef cnp.ndarray[i64] out_e = np.empty(na + nb, np.int64)
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef i64 lo, hi
    while i < na and j < nb:
        lo = as_[i] if as_[i] > bs[j] else bs[j]
        hi = ae[i] if ae[i] < be[j] else be[j]
        if lo < hi:
            out_s[k] = lo
            out_e[k] = hi
            k += 1
        if ae[i] < be[j]:
            i += 1
        else:
            j += 1
    return _trim(out_s, out_e, k)


def union(a_s, a_e, b_s, b_e):
    cdef const i64[::1] as_ = np.ascontiguousarray(a_s, dtype=np.int64)
    cdef const i64[::1] ae = np.ascontiguousarray(a_e, dtype=np.int64)
    cdef const i64[::1] bs = np.ascontiguousarray(b_s, dtype=np.int64)
    cdef const i64[::1] be = np.ascontiguousarray(b_e, dtype=np.int64)
    cdef Py_ssize_t na = as_.shape[0], nb = bs.shape[0]
    cdef cnp.ndarray[i64] out_s = np.empty(na + nb, np.int64)
    cdef cnp.ndarray[i64] out_e = np.empty(na + nb, np.int64)
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef i64 s, e
    while i < na or j < nb:
        if j >= nb or (i < na and as_[i] <= bs[j]):
            s = as_[i]
            e = ae[i]
            i += 1
        else:
            s = bs[j]
            e = be[j]
            j += 1
        if k > 0 and s <= out_e[k - 1]:
            if e > out_e[k - 1]:
                out_e[k - 1] = e
        else:
            out_s[k] = s
            out_e[k] = e
            k += 1
    return _trim(out_s, out_e, k)


def complement(starts, ends, lo, hi):
    cdef const i64[::1] s_in = np.ascontiguousarray(starts, dtype=np.int64)
    cdef const i64[::1] e_in = np.ascontiguousarray(ends, dtype=np.int64)
    cdef Py_ssize_t n = s_in.shape[0], i, k = 0
    cdef cnp.ndarray[i64] out_s = np.empty(n + 1, np.int64)
    cdef cnp.ndarray[i64] out_e = np.empty(n + 1, np.int64)
    cdef i64 cur = lo, top = hi
    for i in range(n):
        if e_in[i] <= cur:
            continue
        if s_in[i] >= top:
            break
        if s_in[i] > cur:
            out_s[k] = cur
            out_e[k] = s_in[i]
            k += 1
        cur = e_in[i]
    if cur < top:
        out_s[k] = cur
        out_e[k] = top
        k += 1
    return _trim(out_s, out_e, k)


def hold_runs(times, mask, cap):
    cdef const i64[::1] t = np.ascontiguousarray(times, dtype=np.int64)
    cdef const cnp.uint8_t[::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n = t.shape[0], i, k = 0
    cdef cnp.ndarray[i64] out_s = np.empty(n, np.int64)
    cdef cnp.ndarray[i64] out_e = np.empty(n, np.int64)
    cdef i64 c = cap, end, ti
    for i in range(n):
        if not m[i]:
            continue
        ti = t[i]
        end = ti + c
        if i + 1 < n and t[i + 1] < end:
            end = t[i + 1]
        if end <= ti:
            continue
        if k > 0 and ti <= out_e[k - 1]:
            if end > out_e[k - 1]:
                out_e[k - 1] = end
        else:
            out_s[k] = ti
            out_e[k] = end
            k += 1
    return _trim(out_s, out_e, k)


cdef Py_ssize_t _lower_bound(double* buf, Py_ssize_t m, double x):
    cdef Py_ssize_t lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if buf[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def trailing_median(times, values, window):
    cdef const i64[::1] t = np.ascontiguousarray(times, dtype=np.int64)
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = t.shape[0], i, lo = 0, m = 0, pos
    cdef cnp.ndarray[double] out = np.full(n, np.nan)
    cdef i64 w = window
    cdef double* buf = <double*>malloc((n + 1) * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            while lo < i and t[lo] < t[i] - w:
                pos = _lower_bound(buf, m, v[lo])
                memmove(&buf[pos], &buf[pos + 1], (m - pos - 1) * sizeof(double))
                m -= 1
                lo += 1
            if m > 0:
                if m % 2:
                    out[i] = buf[m // 2]
                else:
                    out[i] = 0.5 * (buf[m // 2 - 1] + buf[m // 2])
            pos = _lower_bound(buf, m, v[i])
            memmove(&buf[pos + 1], &buf[pos], (m - pos) * sizeof(double))
            buf[pos] = v[i]
            m += 1
    finally:
        free(buf)
    return out
