# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled segmentation kernels; mirrors ``_kernels_py`` exactly."""
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sqrt, M_PI

cnp.import_array()

cdef double _R = 6371000.0
cdef double _DEG = M_PI / 180.0


cdef inline double _dist(double lat1, double lon1, double lat2, double lon2) nogil:
    cdef double phi = ((lat1 + lat2) / 2.0) * _DEG
    cdef double x = ((lon2 - lon1) * _DEG) * cos(phi)
    cdef double y = (lat2 - lat1) * _DEG
    return _R * sqrt(x * x + y * y)


def gps_segments(t_ms, lat, lon, double radius_m, long long gap_ms, long long min_ms):
    cdef const cnp.int64_t[::1] t = np.ascontiguousarray(t_ms, dtype=np.int64)
    cdef const double[::1] la = np.ascontiguousarray(lat, dtype=np.float64)
    cdef const double[::1] lo = np.ascontiguousarray(lon, dtype=np.float64)
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i = 0, j
    out = []
    while i < n:
        j = i + 1
        while (j < n and t[j] - t[j - 1] <= gap_ms
               and _dist(la[i], lo[i], la[j], lo[j]) <= radius_m):
            j += 1
        if t[j - 1] - t[i] >= min_ms:
            out.append((i, j - 1))
            i = j
        else:
            i += 1
    return out


cdef inline double _jac(const cnp.int64_t[::1] aps, Py_ssize_t a0, Py_ssize_t a1,
                        const cnp.int64_t[::1] bps, Py_ssize_t b0, Py_ssize_t b1) nogil:
    cdef Py_ssize_t i = a0, j = b0
    cdef long long inter = 0, union_
    while i < a1 and j < b1:
        if aps[i] == bps[j]:
            inter += 1
            i += 1
            j += 1
        elif aps[i] < bps[j]:
            i += 1
        else:
            j += 1
    union_ = (a1 - a0) + (b1 - b0) - inter
    return <double>(union_ - inter) / <double>union_


def jaccard_sorted(a, b):
    cdef const cnp.int64_t[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef const cnp.int64_t[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    return _jac(av, 0, av.shape[0], bv, 0, bv.shape[0])


def wifi_segments(t_ms, indptr, aps, double jaccard_max, long long gap_ms, long long min_ms):
    cdef const cnp.int64_t[::1] t = np.ascontiguousarray(t_ms, dtype=np.int64)
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] ids = np.ascontiguousarray(aps, dtype=np.int64)
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i = 0, j
    out = []
    while i < n:
        j = i + 1
        while (j < n and t[j] - t[j - 1] <= gap_ms
               and _jac(ids, ptr[i], ptr[i + 1], ids, ptr[j], ptr[j + 1]) <= jaccard_max):
            j += 1
        if t[j - 1] - t[i] >= min_ms:
            out.append((i, j - 1))
            i = j
        else:
            i += 1
    return out


def snapshot_starts(t_ms, long long window_ms):
    cdef const cnp.int64_t[::1] t = np.ascontiguousarray(t_ms, dtype=np.int64)
    cdef Py_ssize_t k, n = t.shape[0]
    cdef long long first = 0
    out = []
    for k in range(n):
        if k == 0 or t[k] - first > window_ms:
            out.append(k)
            first = t[k]
    return out


def chain_runs(t_ms, long long gap_ms, bint strict):
    cdef const cnp.int64_t[::1] t = np.ascontiguousarray(t_ms, dtype=np.int64)
    cdef Py_ssize_t k, start = 0, n = t.shape[0]
    cdef long long d
    out = []
    if n == 0:
        return out
    for k in range(1, n):
        d = t[k] - t[k - 1]
        if (d >= gap_ms) if strict else (d > gap_ms):
            out.append((start, k - 1))
            start = k
    out.append((start, n - 1))
    return out


def jaccard_to_set(indptr, aps, target):
    cdef const cnp.int64_t[::1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const cnp.int64_t[::1] ids = np.ascontiguousarray(aps, dtype=np.int64)
    cdef const cnp.int64_t[::1] tg = np.ascontiguousarray(target, dtype=np.int64)
    cdef Py_ssize_t k, m = ptr.shape[0] - 1
    res = np.empty(m, dtype=np.float64)
    cdef double[::1] r = res
    for k in range(m):
        r[k] = _jac(ids, ptr[k], ptr[k + 1], tg, 0, tg.shape[0])
    return res
