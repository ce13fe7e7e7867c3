# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dynamic-relaxation loop for planar joint chains.

Same arguments, return values and step ordering as
``fspl._core._fallback.relax_chain``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, hypot, isfinite, M_PI, INFINITY

cnp.import_array()

cdef enum:
    STATUS_CONVERGED = 0
    STATUS_TIMEOUT = 1
    STATUS_UNSTABLE = 2
    TRACE_COLUMNS = 9

cdef double RATIO_FLOOR = 1e-6
cdef double UNSTABLE_FLOOR = 1e-6


cdef inline double _sign(double x) nogil:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


cdef void _kinematics(const double[::1] q, double[::1] qfull, const Py_ssize_t[::1] jl,
                      const double[::1] lengths, double mount, double[::1] cx, double[::1] sy,
                      double[::1] px, double[::1] py) noexcept nogil:
    cdef Py_ssize_t i, nl = lengths.shape[0], nj = q.shape[0]
    cdef double phi = mount
    for i in range(nj):
        qfull[jl[i]] = q[i]
    px[0] = 0.0
    py[0] = 0.0
    for i in range(nl):
        phi += qfull[i]
        cx[i] = cos(phi)
        sy[i] = sin(phi)
        px[i + 1] = px[i] + lengths[i] * cx[i]
        py[i + 1] = py[i] + lengths[i] * sy[i]


cdef void _potentials(const double[::1] q, double[::1] qfull, const Py_ssize_t[::1] jl,
                      const double[::1] lengths, const double[::1] masses, double tip_mass,
                      double gravity, double stiffness, double stop_stiffness, double limit,
                      double mount, double[::1] cx, double[::1] sy, double[::1] px,
                      double[::1] py, double* v_grav, double* u_el) noexcept nogil:
    cdef Py_ssize_t i, nl = lengths.shape[0], nj = q.shape[0]
    cdef double vg = 0.0, ue = 0.0, pen
    _kinematics(q, qfull, jl, lengths, mount, cx, sy, px, py)
    for i in range(nl):
        vg += masses[i] * (py[i] + 0.5 * lengths[i] * sy[i])
    vg += tip_mass * py[nl]
    for i in range(nj):
        pen = fabs(q[i]) - limit
        if pen < 0:
            pen = 0.0
        ue += 0.5 * stiffness * q[i] * q[i] + 0.5 * stop_stiffness * pen * pen
    v_grav[0] = gravity * vg
    u_el[0] = ue


def relax_chain(lengths, masses, joint_links, joint_tau, level0, level1, double ramp_duration,
                double tip_mass, double gravity, double stiffness, double stop_stiffness,
                double limit, falloff, inertia, damping, stop_damping, q0, double dt,
                Py_ssize_t max_steps, Py_ssize_t trace_stride, Py_ssize_t check_stride,
                double acc_tol, double ratio_tol, double settle_fraction, double min_time,
                double mount_angle, double drift_tol=INFINITY):
    cdef const double[::1] L = np.ascontiguousarray(lengths, dtype=np.float64)
    cdef const double[::1] M = np.ascontiguousarray(masses, dtype=np.float64)
    cdef const Py_ssize_t[::1] jl = np.ascontiguousarray(joint_links, dtype=np.intp)
    cdef const double[::1] tau = np.ascontiguousarray(joint_tau, dtype=np.float64)
    cdef const double[::1] lv0 = np.ascontiguousarray(level0, dtype=np.float64)
    cdef const double[::1] lv1 = np.ascontiguousarray(level1, dtype=np.float64)
    cdef const double[::1] I = np.ascontiguousarray(inertia, dtype=np.float64)
    cdef const double[::1] cd = np.ascontiguousarray(damping, dtype=np.float64)
    cdef const double[::1] cs = np.ascontiguousarray(stop_damping, dtype=np.float64)
    q_arr = np.array(q0, dtype=np.float64)
    cdef double[::1] q = q_arr
    cdef Py_ssize_t nl = L.shape[0], nj = q.shape[0]
    v_arr = np.zeros(nj)
    cdef double[::1] v = v_arr
    cdef double[::1] qfull = np.zeros(nl)
    cdef double[::1] qmid = np.zeros(nj)
    cdef double[::1] cx = np.zeros(nl)
    cdef double[::1] sy = np.zeros(nl)
    cdef double[::1] px = np.zeros(nl + 1)
    cdef double[::1] py = np.zeros(nl + 1)
    cdef double[::1] mx = np.zeros(nl + 1)
    cdef double[::1] ms = np.zeros(nl + 1)
    cdef Py_ssize_t n_trace = max_steps // trace_stride + 2
    cdef Py_ssize_t n_check = max_steps // check_stride + 2
    trace_arr = np.zeros((n_trace, TRACE_COLUMNS))
    cdef double[:, ::1] trace = trace_arr
    cdef double[::1] chk_t = np.zeros(n_check)
    cdef double[::1] chk_ratio = np.zeros(n_check)
    cdef double[::1] chk_acc = np.zeros(n_check)
    cdef double[::1] chk_x = np.zeros(n_check)
    cdef double[::1] chk_y = np.zeros(n_check)
    cdef bint use_falloff = bool(falloff) and isfinite(limit)
    cdef Py_ssize_t i, j, step, steps = 0, k_tr = 0, k_chk = 0, w0 = 0, kk
    cdef int status = STATUS_TIMEOUT
    cdef double t, x, shape, fa, fg, fe, fdmp, pen, a, vn, half, ke = 0.0, tc, t_w
    cdef double work = 0.0, work_act = 0.0, dissipated = 0.0, peak_work = 0.0
    cdef double ratio = 0.0, mean_acc = 0.0, residual, v_grav, u_el, v_grav0, u_el0
    cdef double win_ratio = np.nan, win_acc = np.nan, wr, wa, fall, drift
    cdef double tip_x = 0.0, tip_y = 0.0, energy_ref

    # mass suffix sums are configuration independent
    ms[nl] = tip_mass
    for i in range(nl - 1, -1, -1):
        ms[i] = ms[i + 1] + M[i]

    with nogil:
        _potentials(q, qfull, jl, L, M, tip_mass, gravity, stiffness, stop_stiffness, limit,
                    mount_angle, cx, sy, px, py, &v_grav0, &u_el0)
        for step in range(max_steps):
            t = step * dt
            _kinematics(q, qfull, jl, L, mount_angle, cx, sy, px, py)
            tip_x = px[nl]
            tip_y = py[nl]
            mx[nl] = tip_mass * px[nl]
            for i in range(nl - 1, -1, -1):
                mx[i] = mx[i + 1] + M[i] * (px[i] + 0.5 * L[i] * cx[i])
            if ramp_duration > 0:
                x = t / ramp_duration
            else:
                x = 1.0
            if x < 1.0:
                shape = 0.5 - 0.5 * cos(M_PI * x)
            else:
                shape = 1.0
            mean_acc = 0.0
            for i in range(nj):
                j = jl[i]
                fg = -gravity * (mx[j] - px[j] * ms[j])
                fa = tau[i] * (lv0[i] + (lv1[i] - lv0[i]) * shape)
                if use_falloff:
                    fall = 1.0 - q[i] / limit
                    if fall < 0.0:
                        fall = 0.0
                    elif fall > 1.0:
                        fall = 1.0
                    fa = fa * fall
                pen = fabs(q[i]) - limit
                if pen < 0.0:
                    pen = 0.0
                fe = -stiffness * q[i] - stop_stiffness * pen * _sign(q[i])
                fdmp = -cd[i] * v[i]
                if pen > 0.0:
                    fdmp -= cs[i] * v[i]
                a = (fg + fa + fe + fdmp) / I[i]
                vn = v[i] + dt * a
                half = 0.5 * dt * (v[i] + vn)
                work_act += fa * half
                work += (fa + fg) * half
                dissipated -= fdmp * half
                mean_acc += fabs(a)
                v[i] = vn
            mean_acc /= nj
            ke = 0.0
            for i in range(nj):
                ke += 0.5 * I[i] * v[i] * v[i]
                qmid[i] = q[i] + 0.5 * dt * v[i]
                q[i] = q[i] + dt * v[i]
            steps = step + 1

            if work > peak_work:
                peak_work = work
            energy_ref = peak_work
            if u_el0 > energy_ref:
                energy_ref = u_el0
            if UNSTABLE_FLOOR > energy_ref:
                energy_ref = UNSTABLE_FLOOR
            if not (isfinite(ke) and isfinite(work)) or ke > 10.0 * energy_ref:
                status = STATUS_UNSTABLE
            ratio = ke / (work if work > RATIO_FLOOR else RATIO_FLOOR)

            if steps % trace_stride == 0 or status == STATUS_UNSTABLE:
                _potentials(qmid, qfull, jl, L, M, tip_mass, gravity, stiffness, stop_stiffness,
                            limit, mount_angle, cx, sy, px, py, &v_grav, &u_el)
                residual = ke + dissipated + (u_el - u_el0) + (v_grav - v_grav0) - work_act
                trace[k_tr, 0] = t + dt
                trace[k_tr, 1] = ke
                trace[k_tr, 2] = work
                trace[k_tr, 3] = ratio
                trace[k_tr, 4] = tip_x
                trace[k_tr, 5] = tip_y
                trace[k_tr, 6] = dissipated
                trace[k_tr, 7] = residual
                trace[k_tr, 8] = mean_acc
                k_tr += 1
            if status == STATUS_UNSTABLE:
                break

            if steps % check_stride == 0:
                tc = steps * dt
                chk_t[k_chk] = tc
                chk_ratio[k_chk] = ratio
                chk_acc[k_chk] = mean_acc
                chk_x[k_chk] = tip_x
                chk_y[k_chk] = tip_y
                k_chk += 1
                t_w = tc * (1.0 - settle_fraction)
                while chk_t[w0] < t_w:
                    w0 += 1
                if tc >= min_time and t_w >= ramp_duration and k_chk - w0 >= 5:
                    wr = 0.0
                    wa = 0.0
                    drift = 0.0
                    for kk in range(w0, k_chk):
                        if chk_ratio[kk] > wr:
                            wr = chk_ratio[kk]
                        wa += chk_acc[kk]
                        x = hypot(chk_x[kk] - chk_x[k_chk - 1], chk_y[kk] - chk_y[k_chk - 1])
                        if x > drift:
                            drift = x
                    wa /= (k_chk - w0)
                    if wr <= ratio_tol and wa < acc_tol and drift <= drift_tol:
                        status = STATUS_CONVERGED
                        win_ratio = wr
                        win_acc = wa
                        break

        _kinematics(q, qfull, jl, L, mount_angle, cx, sy, px, py)

    if k_tr == 0 or trace[k_tr - 1, 0] != steps * dt:
        trace[k_tr, 0] = steps * dt
        trace[k_tr, 1] = ke
        trace[k_tr, 2] = work
        trace[k_tr, 3] = ke / (work if work > RATIO_FLOOR else RATIO_FLOOR)
        trace[k_tr, 4] = px[nl]
        trace[k_tr, 5] = py[nl]
        trace[k_tr, 6] = dissipated
        trace[k_tr, 7] = np.nan
        trace[k_tr, 8] = mean_acc
        k_tr += 1
    else:
        trace[k_tr - 1, 4] = px[nl]
        trace[k_tr - 1, 5] = py[nl]
    if status != STATUS_CONVERGED and k_chk > w0:
        wr = 0.0
        wa = 0.0
        for kk in range(w0, k_chk):
            if chk_ratio[kk] > wr:
                wr = chk_ratio[kk]
            wa += chk_acc[kk]
        win_ratio = wr
        win_acc = wa / (k_chk - w0)
    return q_arr, v_arr, steps, status, trace_arr[:k_tr].copy(), win_ratio, win_acc
