"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--samples 20000] [--steps 20000]
"""

import argparse
import time

import numpy as np

from fspl import kinematics as kin
from fspl import quasistatics as qs
from fspl._core import _fallback

try:
    from fspl._core import _chain, _pcc
except ImportError:  # extension not built
    _chain = _pcc = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def fk_args(n):
    limb = kin.default_limb(kin.WORKSPACE_MOUNT)
    ell, tmax, ux, uy, conn, _ = kin._kernel_inputs(limb)
    frac = kin.sample_fractions(0, 0, n, len(limb.segments))
    R0, t0 = limb.base_frame.rotation, limb.base_frame.translation
    return (frac, ell, tmax, ux, uy, conn, kin.BEND_SIGN, R0, t0)


def chain_args(steps):
    chain = qs.build_chain("fspl", tip_mass=1.0)
    p = qs.integration_params(chain)
    nj = chain.n_joints
    return (np.array(chain.link_lengths), np.array(chain.link_masses), np.array(chain.joint_links),
            np.array(chain.joint_torque_scale), np.zeros(nj), np.ones(nj), 1.0, chain.tip_mass,
            chain.gravity, chain.joint_stiffness, p.stop_stiffness, chain.joint_angle_limit, True,
            p.inertia, p.damping, p.stop_damping, np.zeros(nj), p.dt, steps, 100, 100,
            qs.ACC_TOL, qs.RATIO_TOL, qs.SETTLE_FRACTION, 0.0, 0.0, 0.0)  # drift 0: never settles


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()

    rows = []
    fa = fk_args(a.samples)
    t_py, ref = best_of(lambda: _fallback.batch_tips(*fa), a.repeat)
    rows.append(("batch_tips", f"{a.samples} samples", t_py))
    if _pcc is not None:
        t_cy, out = best_of(lambda: _pcc.batch_tips(*fa), a.repeat)
        rows[-1] += (t_cy, float(np.max(np.abs(out - ref))))

    ca = chain_args(a.steps)
    t_py, ref = best_of(lambda: _fallback.relax_chain(*ca), 1)
    rows.append(("relax_chain", f"{a.steps} steps, 57 hinges", t_py))
    if _chain is not None:
        t_cy, out = best_of(lambda: _chain.relax_chain(*ca), a.repeat)
        rows[-1] += (t_cy, float(np.max(np.abs(out[0] - ref[0]))))

    print(f"{'kernel':<12} {'size':<24} {'numpy s':>10} {'cython s':>10} {'speedup':>8} {'max diff':>10}")
    for row in rows:
        name, size, t_py = row[:3]
        if len(row) > 3:
            t_cy, diff = row[3:]
            print(f"{name:<12} {size:<24} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x {diff:>10.2e}")
        else:
            print(f"{name:<12} {size:<24} {t_py:>10.4f} {'n/a':>10}")


if __name__ == "__main__":
    main()
