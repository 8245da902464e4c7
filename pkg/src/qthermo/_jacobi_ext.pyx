# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cyclic Jacobi diagonalizer; arithmetic matches ``_jacobi_py``."""

from libc.math cimport sqrt, fabs

import numpy as np


def jacobi_hermitian(a, int max_sweeps=100, double tol=1e-14):
    cdef Py_ssize_t n = a.shape[0]
    ar_np = np.ascontiguousarray(a.real, dtype=np.float64).copy()
    ai_np = np.ascontiguousarray(a.imag, dtype=np.float64).copy()
    vr_np = np.eye(n, dtype=np.float64)
    vi_np = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] ar = ar_np
    cdef double[:, ::1] ai = ai_np
    cdef double[:, ::1] vr = vr_np
    cdef double[:, ::1] vi = vi_np
    cdef Py_ssize_t i, j, p, q, k
    cdef int sweep, sweeps = -1
    cdef double frob2 = 0.0, off2, thresh
    cdef double br, bi, mag, theta, t, c, s, er, ei
    cdef double kpr, kpi, wr, wi, pkr, pki, ur, ui

    for i in range(n):
        ai[i, i] = 0.0
    for i in range(n):
        for j in range(n):
            frob2 += ar[i, j] * ar[i, j] + ai[i, j] * ai[i, j]
    thresh = tol * tol * frob2

    for sweep in range(max_sweeps + 1):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += ar[p, q] * ar[p, q] + ai[p, q] * ai[p, q]
        if off2 <= thresh:
            sweeps = sweep
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                br = ar[p, q]
                bi = ai[p, q]
                mag = sqrt(br * br + bi * bi)
                if mag < 1e-300:
                    continue
                theta = (ar[q, q] - ar[p, p]) / (2.0 * mag)
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                er = br / mag
                ei = bi / mag
                for k in range(n):
                    kpr = ar[k, p]
                    kpi = ai[k, p]
                    wr = ar[k, q] * er + ai[k, q] * ei
                    wi = ai[k, q] * er - ar[k, q] * ei
                    ar[k, p] = c * kpr - s * wr
                    ai[k, p] = c * kpi - s * wi
                    ar[k, q] = s * kpr + c * wr
                    ai[k, q] = s * kpi + c * wi
                    kpr = vr[k, p]
                    kpi = vi[k, p]
                    wr = vr[k, q] * er + vi[k, q] * ei
                    wi = vi[k, q] * er - vr[k, q] * ei
                    vr[k, p] = c * kpr - s * wr
                    vi[k, p] = c * kpi - s * wi
                    vr[k, q] = s * kpr + c * wr
                    vi[k, q] = s * kpi + c * wi
                for k in range(n):
                    pkr = ar[p, k]
                    pki = ai[p, k]
                    ur = er * ar[q, k] - ei * ai[q, k]
                    ui = er * ai[q, k] + ei * ar[q, k]
                    ar[p, k] = c * pkr - s * ur
                    ai[p, k] = c * pki - s * ui
                    ar[q, k] = s * pkr + c * ur
                    ai[q, k] = s * pki + c * ui
                ar[p, q] = 0.0
                ai[p, q] = 0.0
                ar[q, p] = 0.0
                ai[q, p] = 0.0
                ai[p, p] = 0.0
                ai[q, q] = 0.0

    diag = np.array([ar[i, i] for i in range(n)], dtype=np.float64)
    return diag, vr_np + 1j * vi_np, sweeps
