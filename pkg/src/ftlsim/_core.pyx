# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Must stay bit-identical to ``_core_py``."""

import numpy as np

cimport cython
from libc.stdint cimport int64_t


cdef inline double _step(double p, double p01, double p11, bint *vacuous) noexcept nogil:
    cdef double p0, num, den
    p0 = 1.0 - p
    num = p * (p11 * p11 + (1.0 - p11) * p01)
    den = num + p0 * p01 * ((1.0 - p01) + p11)
    if den == 0.0:
        vacuous[0] = True
        return p
    if p01 == p11:
        return p
    return num / den


def posterior_step(double prior, double p01, double p11):
    cdef bint vacuous = False
    cdef double out = _step(prior, p01, p11, &vacuous)
    return out, bool(vacuous)


def posterior_chain(double prior, double p01, double p11, double eps, Py_ssize_t max_steps):
    """Iterate the posterior map; returns (iterates, vacuous, converged)."""
    cdef Py_ssize_t cap = 64 if max_steps + 1 > 64 else max_steps + 1
    cdef Py_ssize_t n = 1
    cdef double p = prior
    cdef bint vacuous = False
    cdef bint converged = 1.0 - p < eps
    buf = np.empty(cap, dtype=np.float64)
    cdef double[::1] view = buf
    view[0] = p
    while not converged and n <= max_steps:
        if n == cap:
            cap = min(2 * cap, max_steps + 1)
            buf = np.resize(buf, cap)
            view = buf
        p = _step(p, p01, p11, &vacuous)
        view[n] = p
        n += 1
        converged = 1.0 - p < eps
    return buf[:n].copy(), bool(vacuous), bool(converged)


def window_counts(const double[::1] times, const int64_t[::1] offsets, const double[::1] edges):
    """counts[c, e] = number of alarms of cycle c with time <= edges[e]."""
    cdef Py_ssize_t n_cycles = offsets.shape[0] - 1
    cdef Py_ssize_t n_edges = edges.shape[0]
    out = np.zeros((n_cycles, n_edges), dtype=np.int64)
    cdef int64_t[:, ::1] counts = out
    cdef Py_ssize_t c, e, lo, hi, mid, start
    cdef double edge
    with nogil:
        for c in range(n_cycles):
            start = offsets[c]
            for e in range(n_edges):
                edge = edges[e]
                lo = start
                hi = offsets[c + 1]
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if times[mid] <= edge:
                        lo = mid + 1
                    else:
                        hi = mid
                counts[c, e] = lo - start
    return out


def bootstrap_sums(const int64_t[:, ::1] values, const int64_t[:, ::1] idx):
    """sums[b, m] = sum_j values[idx[b, j], m]."""
    cdef Py_ssize_t n_boot = idx.shape[0]
    cdef Py_ssize_t n = idx.shape[1]
    cdef Py_ssize_t m = values.shape[1]
    out = np.zeros((n_boot, m), dtype=np.int64)
    cdef int64_t[:, ::1] sums = out
    cdef Py_ssize_t b, j, k, row
    with nogil:
        for b in range(n_boot):
            for j in range(n):
                row = idx[b, j]
                for k in range(m):
                    sums[b, k] += values[row, k]
    return out
