"""Pure-Python cyclic Jacobi diagonalizer for complex Hermitian matrices.

Used when the compiled ``_jacobi_ext`` module is unavailable. The arithmetic
mirrors ``_jacobi_ext.pyx`` operation for operation (real and imaginary parts
carried separately) so both backends return bit-identical results.
"""

from math import sqrt

import numpy as np


def jacobi_hermitian(a, max_sweeps=100, tol=1e-14):
    """Diagonalize a Hermitian matrix in place of a copy.

    Returns ``(diag, vecs, sweeps)``; ``sweeps`` is -1 when the budget is
    exhausted before the off-diagonal norm falls below ``tol * ||a||_F``.
    Eigenvalues are returned unsorted.
    """
    n = a.shape[0]
    ar = a.real.tolist()
    ai = a.imag.tolist()
    vr = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    vi = [[0.0] * n for _ in range(n)]
    for i in range(n):
        ai[i][i] = 0.0

    frob2 = 0.0
    for i in range(n):
        for j in range(n):
            frob2 += ar[i][j] * ar[i][j] + ai[i][j] * ai[i][j]
    thresh = tol * tol * frob2

    sweeps = -1
    for sweep in range(max_sweeps + 1):
        off2 = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off2 += ar[p][q] * ar[p][q] + ai[p][q] * ai[p][q]
        if off2 <= thresh:
            sweeps = sweep
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                br = ar[p][q]
                bi = ai[p][q]
                mag = sqrt(br * br + bi * bi)
                if mag < 1e-300:
                    continue
                theta = (ar[q][q] - ar[p][p]) / (2.0 * mag)
                t = 1.0 / (abs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                er = br / mag
                ei = bi / mag
                # A <- A J, V <- V J with J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
                for k in range(n):
                    kpr = ar[k][p]
                    kpi = ai[k][p]
                    wr = ar[k][q] * er + ai[k][q] * ei
                    wi = ai[k][q] * er - ar[k][q] * ei
                    ar[k][p] = c * kpr - s * wr
                    ai[k][p] = c * kpi - s * wi
                    ar[k][q] = s * kpr + c * wr
                    ai[k][q] = s * kpi + c * wi
                    kpr = vr[k][p]
                    kpi = vi[k][p]
                    wr = vr[k][q] * er + vi[k][q] * ei
                    wi = vi[k][q] * er - vr[k][q] * ei
                    vr[k][p] = c * kpr - s * wr
                    vi[k][p] = c * kpi - s * wi
                    vr[k][q] = s * kpr + c * wr
                    vi[k][q] = s * kpi + c * wi
                # A <- J^dagger A
                for k in range(n):
                    pkr = ar[p][k]
                    pki = ai[p][k]
                    ur = er * ar[q][k] - ei * ai[q][k]
                    ui = er * ai[q][k] + ei * ar[q][k]
                    ar[p][k] = c * pkr - s * ur
                    ai[p][k] = c * pki - s * ui
                    ar[q][k] = s * pkr + c * ur
                    ai[q][k] = s * pki + c * ui
                ar[p][q] = 0.0
                ai[p][q] = 0.0
                ar[q][p] = 0.0
                ai[q][p] = 0.0
                ai[p][p] = 0.0
                ai[q][q] = 0.0

    diag = np.array([ar[i][i] for i in range(n)], dtype=np.float64)
    vecs = np.array(vr, dtype=np.float64) + 1j * np.array(vi, dtype=np.float64)
    return diag, vecs, sweeps
