# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels; see _pykernels.py for the reference versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs, pow

cnp.import_array()


def trapezoid(y, double h):
    cdef const double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0] - 1, i
    cdef double s
    if n < 1:
        return 0.0
    s = 0.5 * (v[0] + v[n])
    for i in range(1, n):
        s += v[i]
    return h * s


def simpson(y, double h):
    cdef const double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0] - 1, i
    cdef double odd = 0.0, even = 0.0
    if n < 2 or n % 2:
        raise ValueError("simpson needs an even number of panels")
    for i in range(1, n, 2):
        odd += v[i]
    for i in range(2, n - 1, 2):
        even += v[i]
    return h / 3.0 * (v[0] + 4.0 * odd + 2.0 * even + v[n])


def cumtrapz(y, x):
    cdef const double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    cdef const double[::1] t = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(1, n):
        o[i] = o[i - 1] + 0.5 * (v[i] + v[i - 1]) * (t[i] - t[i - 1])
    return out


def running_min(y):
    cdef const double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    if n == 0:
        return out
    o[0] = v[0]
    for i in range(1, n):
        o[i] = v[i] if v[i] < o[i - 1] else o[i - 1]
    return out


def max_growth_ratio(mass, radii, double expo):
    cdef const double[:, ::1] m = np.ascontiguousarray(mass, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(radii, dtype=np.float64)
    cdef Py_ssize_t nc = m.shape[0], nr = m.shape[1], i, j, k
    cdef double best = -INFINITY, val
    cdef Py_ssize_t bi = -1, bj = -1, bk = -1
    for i in range(nc):
        for k in range(nr):
            if m[i, k] <= 0.0:
                continue
            for j in range(k + 1):
                val = m[i, j] / m[i, k] * pow(r[k] / r[j], expo)
                if val > best:
                    best = val
                    bi = i
                    bj = j
                    bk = k
    return (best, bi, bj, bk)


def isolated_dips(y, double rel):
    cdef const double[::1] v = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0], i
    cdef double nb
    hits = []
    for i in range(1, n - 1):
        nb = v[i - 1] if v[i - 1] < v[i + 1] else v[i + 1]
        if v[i] < nb - rel * fabs(nb):
            hits.append(i)
    return np.asarray(hits, dtype=np.int64)
