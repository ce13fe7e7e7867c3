# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch forward kinematics for constant-curvature segment chains."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

cdef double STRAIGHT_KAPPA = 1e-9


def batch_tips(fractions, ell, theta_max, ux, uy, connectors, double bend_sign, base_R, base_t):
    cdef const double[:, :, ::1] f = np.ascontiguousarray(fractions, dtype=np.float64)
    cdef const double[::1] l = np.ascontiguousarray(ell, dtype=np.float64)
    cdef const double[::1] tm = np.ascontiguousarray(theta_max, dtype=np.float64)
    cdef const double[:, ::1] ax = np.ascontiguousarray(ux, dtype=np.float64)
    cdef const double[:, ::1] ay = np.ascontiguousarray(uy, dtype=np.float64)
    cdef const double[::1] conn = np.ascontiguousarray(connectors, dtype=np.float64)
    cdef const double[:, ::1] R0 = np.ascontiguousarray(base_R, dtype=np.float64)
    cdef const double[::1] t0 = np.ascontiguousarray(base_t, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], n_seg = f.shape[1]
    out = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t k, s, i, j, a
    cdef double R[3][3]
    cdef double Rn[3][3]
    cdef double Rl[3][3]
    cdef double t[3]
    cdef double loc[3]
    cdef double bx, by, norm, ang, c, sn, C, S, rad
    with nogil:
        for k in range(n):
            for i in range(3):
                t[i] = t0[i]
                for j in range(3):
                    R[i][j] = R0[i, j]
            for i in range(3):
                t[i] += R[i][2] * conn[0]
            for s in range(n_seg):
                bx = 0.0
                by = 0.0
                for a in range(3):
                    bx += f[k, s, a] * ax[s, a]
                    by += f[k, s, a] * ay[s, a]
                bx *= bend_sign * tm[s]
                by *= bend_sign * tm[s]
                norm = sqrt(bx * bx + by * by)
                ang = norm if norm < tm[s] else tm[s]
                if ang / l[s] < STRAIGHT_KAPPA:
                    for i in range(3):
                        t[i] += R[i][2] * l[s]
                else:
                    c = bx / norm
                    sn = by / norm
                    C = cos(ang)
                    S = sin(ang)
                    rad = l[s] / ang
                    loc[0] = rad * (1.0 - C) * c
                    loc[1] = rad * (1.0 - C) * sn
                    loc[2] = rad * S
                    Rl[0][0] = c * c * C + sn * sn
                    Rl[0][1] = c * sn * (C - 1.0)
                    Rl[0][2] = c * S
                    Rl[1][0] = Rl[0][1]
                    Rl[1][1] = sn * sn * C + c * c
                    Rl[1][2] = sn * S
                    Rl[2][0] = -c * S
                    Rl[2][1] = -sn * S
                    Rl[2][2] = C
                    for i in range(3):
                        t[i] += R[i][0] * loc[0] + R[i][1] * loc[1] + R[i][2] * loc[2]
                    for i in range(3):
                        for j in range(3):
                            Rn[i][j] = R[i][0] * Rl[0][j] + R[i][1] * Rl[1][j] + R[i][2] * Rl[2][j]
                    for i in range(3):
                        for j in range(3):
                            R[i][j] = Rn[i][j]
                for i in range(3):
                    t[i] += R[i][2] * conn[s + 1]
            for i in range(3):
                o[k, i] = t[i]
    return out
