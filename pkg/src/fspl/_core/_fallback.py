"""Numpy implementations of the hot kernels.

These mirror the Cython kernels in ``_pcc.pyx`` and ``_chain.pyx`` argument
for argument and are used when the extension is not built (or when
``FSPL_PURE_PYTHON=1``).
"""

import math

import numpy as np

STATUS_CONVERGED = 0
STATUS_TIMEOUT = 1
STATUS_UNSTABLE = 2

# t, ke, work, ratio, tip_x, tip_y, dissipated, audit_residual, mean_abs_acc
TRACE_COLUMNS = 9
RATIO_FLOOR = 1e-6  # J
UNSTABLE_FLOOR = 1e-6  # J
STRAIGHT_KAPPA = 1e-9  # 1/m


def batch_tips(fractions, ell, theta_max, ux, uy, connectors, bend_sign, base_R, base_t):
    """Tip positions for a batch of pressure commands.

    ``fractions`` has shape (N, S, 3): the pressure of every array divided by
    its segment's rated pressure. ``ux``/``uy`` hold the in-plane unit vector
    of each array, shape (S, 3).
    """
    fractions = np.asarray(fractions, dtype=np.float64)
    n = fractions.shape[0]
    n_seg = fractions.shape[1]
    R = np.broadcast_to(np.asarray(base_R, dtype=np.float64), (n, 3, 3)).copy()
    t = np.broadcast_to(np.asarray(base_t, dtype=np.float64), (n, 3)).copy()
    t += R[:, :, 2] * connectors[0]
    for s in range(n_seg):
        f = fractions[:, s, :]
        bx = bend_sign * theta_max[s] * (f @ ux[s])
        by = bend_sign * theta_max[s] * (f @ uy[s])
        norm = np.hypot(bx, by)
        ang = np.minimum(norm, theta_max[s])
        bent = ang / ell[s] >= STRAIGHT_KAPPA
        safe = np.where(bent, ang, 1.0)
        norm = np.where(bent, norm, 1.0)
        c = np.where(bent, bx / norm, 1.0)
        sn = np.where(bent, by / norm, 0.0)
        C = np.cos(ang)
        S = np.sin(ang)
        rad = ell[s] / safe
        lx = np.where(bent, rad * (1.0 - C) * c, 0.0)
        ly = np.where(bent, rad * (1.0 - C) * sn, 0.0)
        lz = np.where(bent, rad * S, ell[s])
        C = np.where(bent, C, 1.0)
        S = np.where(bent, S, 0.0)
        Rl = np.empty((n, 3, 3))
        Rl[:, 0, 0] = c * c * C + sn * sn
        Rl[:, 0, 1] = c * sn * (C - 1.0)
        Rl[:, 0, 2] = c * S
        Rl[:, 1, 0] = Rl[:, 0, 1]
        Rl[:, 1, 1] = sn * sn * C + c * c
        Rl[:, 1, 2] = sn * S
        Rl[:, 2, 0] = -c * S
        Rl[:, 2, 1] = -sn * S
        Rl[:, 2, 2] = C
        t += np.einsum("nij,nj->ni", R, np.stack([lx, ly, lz], axis=1))
        R = R @ Rl
        t += R[:, :, 2] * connectors[s + 1]
    return t


def _planar_state(q, qfull, joint_links, lengths, mount_angle):
    qfull[joint_links] = q
    phi = mount_angle + np.cumsum(qfull)
    cx = np.cos(phi)
    sy = np.sin(phi)
    px = np.empty(len(lengths) + 1)
    py = np.empty(len(lengths) + 1)
    px[0] = 0.0
    py[0] = 0.0
    np.cumsum(lengths * cx, out=px[1:])
    np.cumsum(lengths * sy, out=py[1:])
    return cx, sy, px, py


def _potentials(q, qfull, joint_links, lengths, masses, tip_mass, gravity, stiffness,
                stop_stiffness, limit, mount_angle):
    cx, sy, px, py = _planar_state(q, qfull, joint_links, lengths, mount_angle)
    com_y = py[:-1] + 0.5 * lengths * sy
    v_grav = gravity * (np.dot(masses, com_y) + tip_mass * py[-1])
    pen = np.maximum(np.abs(q) - limit, 0.0)
    u_el = 0.5 * stiffness * np.dot(q, q) + 0.5 * stop_stiffness * np.dot(pen, pen)
    return v_grav, u_el


def relax_chain(lengths, masses, joint_links, joint_tau, level0, level1, ramp_duration,
                tip_mass, gravity, stiffness, stop_stiffness, limit, falloff,
                inertia, damping, stop_damping, q0, dt, max_steps, trace_stride,
                check_stride, acc_tol, ratio_tol, settle_fraction, min_time, mount_angle,
                drift_tol=math.inf):
    """Explicit damped integration of a planar joint chain until it settles.

    Settled means: over the trailing window, the largest KE/W at most
    ``ratio_tol``, mean |acceleration| below ``acc_tol`` and no tip sample
    farther than ``drift_tol`` from the latest one.

    Returns ``(q, v, steps, status, trace, window_max_ratio, window_mean_acc)``.
    """
    lengths = np.ascontiguousarray(lengths, dtype=np.float64)
    masses = np.ascontiguousarray(masses, dtype=np.float64)
    joint_links = np.ascontiguousarray(joint_links, dtype=np.intp)
    joint_tau = np.asarray(joint_tau, dtype=np.float64)
    level0 = np.asarray(level0, dtype=np.float64)
    level1 = np.asarray(level1, dtype=np.float64)
    inertia = np.asarray(inertia, dtype=np.float64)
    damping = np.asarray(damping, dtype=np.float64)
    stop_damping = np.asarray(stop_damping, dtype=np.float64)
    q = np.array(q0, dtype=np.float64)
    nj = q.shape[0]
    v = np.zeros(nj)
    qfull = np.zeros(lengths.shape[0])
    mass_suffix = np.cumsum(masses[::-1])[::-1] + tip_mass
    use_falloff = bool(falloff) and math.isfinite(limit)
    inv_inertia = 1.0 / inertia

    v_grav0, u_el0 = _potentials(q, qfull, joint_links, lengths, masses, tip_mass, gravity,
                                 stiffness, stop_stiffness, limit, mount_angle)
    # A preloaded start may legitimately turn its stored spring energy into KE.

    n_trace = max_steps // trace_stride + 2
    trace = np.zeros((n_trace, TRACE_COLUMNS))
    n_check = max_steps // check_stride + 2
    chk_t = np.zeros(n_check)
    chk_ratio = np.zeros(n_check)
    chk_acc = np.zeros(n_check)
    chk_x = np.zeros(n_check)
    chk_y = np.zeros(n_check)
    k_chk = 0
    w0 = 0
    k_tr = 0

    work = 0.0
    work_act = 0.0
    dissipated = 0.0
    peak_work = 0.0
    status = STATUS_TIMEOUT
    win_ratio = math.nan
    win_acc = math.nan
    steps = 0
    for step in range(max_steps):
        t = step * dt
        cx, sy, px, py = _planar_state(q, qfull, joint_links, lengths, mount_angle)
        com_x = px[:-1] + 0.5 * lengths * cx
        mx = np.cumsum((masses * com_x)[::-1])[::-1] + tip_mass * px[-1]
        f_grav = -gravity * (mx[joint_links] - px[joint_links] * mass_suffix[joint_links])

        x = t / ramp_duration if ramp_duration > 0 else 1.0
        shape = 0.5 - 0.5 * math.cos(math.pi * x) if x < 1.0 else 1.0
        f_act = joint_tau * (level0 + (level1 - level0) * shape)
        if use_falloff:
            f_act = f_act * np.clip(1.0 - q / limit, 0.0, 1.0)
        pen = np.maximum(np.abs(q) - limit, 0.0)
        f_el = -stiffness * q - stop_stiffness * pen * np.sign(q)
        f_damp = -damping * v - stop_damping * v * (pen > 0)

        acc = (f_grav + f_act + f_el + f_damp) * inv_inertia
        v_new = v + dt * acc
        half = 0.5 * dt * (v + v_new)
        work_act += np.dot(f_act, half)
        work += np.dot(f_act + f_grav, half)
        dissipated -= np.dot(f_damp, half)
        ke = 0.5 * np.dot(inertia, v_new * v_new)
        q_mid = q + 0.5 * dt * v_new
        q = q + dt * v_new
        v = v_new
        steps = step + 1
        mean_acc = float(np.mean(np.abs(acc)))

        if work > peak_work:
            peak_work = work
        if not (math.isfinite(ke) and math.isfinite(work)) or ke > 10.0 * max(peak_work, u_el0, UNSTABLE_FLOOR):
            status = STATUS_UNSTABLE
        ratio = ke / max(work, RATIO_FLOOR)

        if steps % trace_stride == 0 or status == STATUS_UNSTABLE:
            v_grav, u_el = _potentials(q_mid, qfull, joint_links, lengths, masses, tip_mass,
                                       gravity, stiffness, stop_stiffness, limit, mount_angle)
            residual = ke + dissipated + (u_el - u_el0) + (v_grav - v_grav0) - work_act
            trace[k_tr] = (t + dt, ke, work, ratio, px[-1], py[-1], dissipated, residual, mean_acc)
            k_tr += 1
        if status == STATUS_UNSTABLE:
            break

        if steps % check_stride == 0:
            tc = steps * dt
            chk_t[k_chk] = tc
            chk_ratio[k_chk] = ratio
            chk_acc[k_chk] = mean_acc
            chk_x[k_chk] = px[-1]
            chk_y[k_chk] = py[-1]
            k_chk += 1
            t_w = tc * (1.0 - settle_fraction)
            while chk_t[w0] < t_w:
                w0 += 1
            if tc >= min_time and t_w >= ramp_duration and k_chk - w0 >= 5:
                wr = float(np.max(chk_ratio[w0:k_chk]))
                wa = float(np.mean(chk_acc[w0:k_chk]))
                drift = float(np.max(np.hypot(chk_x[w0:k_chk] - chk_x[k_chk - 1],
                                              chk_y[w0:k_chk] - chk_y[k_chk - 1])))
                if wr <= ratio_tol and wa < acc_tol and drift <= drift_tol:
                    status = STATUS_CONVERGED
                    win_ratio = wr
                    win_acc = wa
                    break

    # Close the trace with the final configuration when the last step was not recorded.
    if k_tr == 0 or trace[k_tr - 1, 0] != steps * dt:
        cx, sy, px, py = _planar_state(q, qfull, joint_links, lengths, mount_angle)
        trace[k_tr] = (steps * dt, ke, work, ke / max(work, RATIO_FLOOR), px[-1], py[-1],
                       dissipated, math.nan, mean_acc)
        k_tr += 1
    else:
        cx, sy, px, py = _planar_state(q, qfull, joint_links, lengths, mount_angle)
        trace[k_tr - 1, 4] = px[-1]
        trace[k_tr - 1, 5] = py[-1]
    if status != STATUS_CONVERGED and k_chk > w0:
        win_ratio = float(np.max(chk_ratio[w0:k_chk]))
        win_acc = float(np.mean(chk_acc[w0:k_chk]))
    return q, v, steps, status, trace[:k_tr], win_ratio, win_acc
