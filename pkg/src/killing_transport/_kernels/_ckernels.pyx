# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled linear RK4 kernel; same contract as ``_pykernels.rk4_linear``."""

import numpy as np


cdef inline void _matmul(const double[:, ::1] q, double[:, ::1] y, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t d = q.shape[0], k = y.shape[1], a, b, c
    cdef double s
    for a in range(d):
        for c in range(k):
            s = 0.0
            for b in range(d):
                s += q[a, b] * y[b, c]
            out[a, c] = s


def rk4_linear(q_nodes, q_mid, double dt, y0):
    cdef const double[:, :, ::1] qn = np.ascontiguousarray(q_nodes, dtype=np.float64)
    cdef const double[:, :, ::1] qm = np.ascontiguousarray(q_mid, dtype=np.float64)
    y_init = np.array(y0, dtype=np.float64, order="C")
    cdef Py_ssize_t M = qm.shape[0], d = y_init.shape[0], k = y_init.shape[1]
    if qn.shape[0] != M + 1 or qn.shape[1] != d or qm.shape[1] != d:
        raise ValueError("coefficient and state shapes do not match")
    result = np.empty((M + 1, d, k), dtype=np.float64)
    cdef double[:, :, ::1] out = result
    cdef double[:, ::1] y = y_init
    cdef double[:, ::1] k1 = np.empty((d, k)), k2 = np.empty((d, k))
    cdef double[:, ::1] k3 = np.empty((d, k)), k4 = np.empty((d, k))
    cdef double[:, ::1] tmp = np.empty((d, k))
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef Py_ssize_t i, a, c
    with nogil:
        for a in range(d):
            for c in range(k):
                out[0, a, c] = y[a, c]
        for i in range(M):
            _matmul(qn[i], y, k1)
            for a in range(d):
                for c in range(k):
                    tmp[a, c] = y[a, c] + half * k1[a, c]
            _matmul(qm[i], tmp, k2)
            for a in range(d):
                for c in range(k):
                    tmp[a, c] = y[a, c] + half * k2[a, c]
            _matmul(qm[i], tmp, k3)
            for a in range(d):
                for c in range(k):
                    tmp[a, c] = y[a, c] + dt * k3[a, c]
            _matmul(qn[i + 1], tmp, k4)
            for a in range(d):
                for c in range(k):
                    y[a, c] = y[a, c] + sixth * (k1[a, c] + 2.0 * (k2[a, c] + k3[a, c]) + k4[a, c])
                    out[i + 1, a, c] = y[a, c]
    return result
