# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled accumulation kernel; same contract as _kernels_py.rhs_accumulate."""

import numpy as np

from libc.math cimport INFINITY, exp, pow, sqrt


cdef inline double _psi(double r, int family_id, double p) nogil:
    if family_id == 0:
        return 1.0
    if family_id == 1:
        if p == 1.0:
            return 1.0 / (1.0 + r * r)
        return pow(1.0 + r * r, -p)
    return exp(-p * r)


cdef inline Py_ssize_t _segment(const double[::1] times, double s, Py_ssize_t n) nogil:
    # rightmost k with times[k] <= s, clamped to a valid segment start
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if times[mid] <= s:
            lo = mid + 1
        else:
            hi = mid
    lo -= 1
    if lo < 0:
        lo = 0
    elif lo > n - 2:
        lo = n - 2
    return lo


def rhs_accumulate(
    const double[::1] times,
    const double[:, :, ::1] states,
    const double[:, ::1] x_t,
    double[:, ::1] out,
    const double[::1] nodes,
    const double[::1] node_w,
    double inv_nh,
    int family_id,
    double family_param,
    bint normalized,
):
    cdef Py_ssize_t n_stamps = times.shape[0]
    if n_stamps < 2:
        raise ValueError("rhs_accumulate: need at least two history stamps")
    cdef Py_ssize_t n = x_t.shape[0]
    cdef Py_ssize_t d = x_t.shape[1]
    cdef Py_ssize_t n_nodes = nodes.shape[0]

    xs_arr = np.empty((n, d))
    w_arr = np.empty((n, n))
    cdef double[:, ::1] xs = xs_arr
    cdef double[:, ::1] w = w_arr

    cdef double a_min = INFINITY
    cdef double a_max = -INFINITY
    cdef double rs_max = -INFINITY
    cdef double s, th, scale, acc, dv, wv, inv_row
    cdef Py_ssize_t m, k, i, j, c

    with nogil:
        for i in range(n):
            for c in range(d):
                out[i, c] = 0.0
        for m in range(n_nodes):
            s = nodes[m]
            k = _segment(times, s, n_stamps)
            th = (s - times[k]) / (times[k + 1] - times[k])
            if th < 0.0:
                th = 0.0
            elif th > 1.0:
                th = 1.0
            for j in range(n):
                for c in range(d):
                    xs[j, c] = (1.0 - th) * states[k, j, c] + th * states[k + 1, j, c]
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for c in range(d):
                        dv = xs[j, c] - x_t[i, c]
                        acc += dv * dv
                    w[i, j] = _psi(sqrt(acc), family_id, family_param)
            if normalized:
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += w[i, j]
                    inv_row = n / acc
                    for j in range(n):
                        w[i, j] *= inv_row
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    wv = w[i, j]
                    acc += wv
                    if wv < a_min:
                        a_min = wv
                    if wv > a_max:
                        a_max = wv
                acc /= n
                if acc > rs_max:
                    rs_max = acc
            scale = node_w[m] * inv_nh
            for i in range(n):
                for j in range(n):
                    if j == i:
                        continue
                    wv = w[i, j] * scale
                    for c in range(d):
                        out[i, c] += wv * (xs[j, c] - x_t[i, c])
    return a_min, a_max, rs_max
