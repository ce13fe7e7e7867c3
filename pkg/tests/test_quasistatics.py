import math

import numpy as np
import pytest

import oracles as O
from fspl import quasistatics as Q
from fspl.mechanics import G, f3ba_moment_model

TAU = f3ba_moment_model().tau_cal


def settle(chain, pressure=0.0, time=30.0, **kw):
    return Q.simulate(chain, Q.RampSchedule(0.0, pressure, pressure), time, **kw)


def test_build_chain_examples():
    f3ba = Q.build_chain("f3ba")
    assert f3ba.n_links == f3ba.n_joints == 19
    assert f3ba.link_lengths[0] == pytest.approx(0.00842, abs=1e-5)
    assert f3ba.link_masses[0] == pytest.approx(0.0195, abs=1e-4)
    assert f3ba.joint_angle_limit == pytest.approx(math.pi / 19)
    fspl = Q.build_chain("fspl")
    assert fspl.n_joints == 57 and fspl.n_links == 61
    assert fspl.length == pytest.approx(0.59, abs=1e-12)
    assert fspl.mass == pytest.approx(1.1, abs=1e-12)
    assert Q.build_chain("array").mass == pytest.approx(0.37 / 3)
    with pytest.raises(Q.QuasiStaticError):
        Q.build_chain("wing")


def test_min_ramp_duration():
    assert Q.min_ramp_duration(0.16, 770.0) == pytest.approx(0.0208, abs=1e-4)
    assert Q.min_ramp_duration(0.59, 770.0) == pytest.approx(0.0766, abs=1e-4)
    assert Q.min_ramp_duration(0.32, 770.0) == pytest.approx(2 * Q.min_ramp_duration(0.16, 770.0))
    with pytest.raises(Q.QuasiStaticError):
        Q.min_ramp_duration(0.0, 770.0)


def test_ramp_floor_enforced():
    chain = Q.build_chain("f3ba")
    with pytest.raises(Q.QuasiStaticError, match="below the minimum"):
        Q.simulate(chain, Q.RampSchedule(0.001, 0.345), 1.0)
    with pytest.raises(Q.QuasiStaticError, match="max_time"):
        Q.simulate(chain, Q.RampSchedule(1.0, 0.345), 1.5)


def test_pressure_validation():
    chain = Q.build_chain("fspl")
    with pytest.raises(Q.QuasiStaticError, match="exceeds p_max"):
        Q.simulate(chain, Q.RampSchedule(1.0, 0.4), 2.0)
    with pytest.raises(Q.QuasiStaticError, match="takes 3"):
        Q.simulate(chain, Q.RampSchedule(1.0, (0.1, 0.1)), 2.0)
    with pytest.raises(Q.QuasiStaticError):
        Q.RampSchedule(-1.0, 0.1)


def test_hanging_chain_is_vertical():
    chain = Q.build_chain("f3ba", joint_stiffness=0.0, theta_n=math.inf, torque_falloff=False)
    res = settle(chain, time=60.0)
    assert res.converged
    x, y = res.tip_position
    assert abs(x) < 1e-3
    assert y == pytest.approx(-0.16, abs=1e-3)


def test_spring_balance_without_gravity():
    chain = Q.build_chain("f3ba", joint_stiffness=0.5, theta_n=math.inf, torque_falloff=False,
                          gravity=0.0)
    res = Q.simulate(chain, Q.RampSchedule(1.0, 0.01), 20.0, acc_tol=1e-7)
    assert res.converged
    expected = TAU * (0.01 / 0.345) / 0.5
    assert np.allclose(res.final_angles, expected, rtol=1e-3)


def test_energy_audit():
    chain = Q.build_chain("f3ba", tip_mass=2.0)
    res = Q.simulate(chain, Q.RampSchedule(1.0, 0.345), 2.0, dt=2.5e-5, trace_stride=400)
    audit = res.audit_trace[np.isfinite(res.audit_trace)]
    W = np.max(np.abs(res.work_trace))
    assert np.max(np.abs(audit)) / W < 1e-6


def test_converged_runs_report_small_ratio():
    for m in (0.0, 2.0, 5.0):
        out = Q.lift_test(Q.build_chain("f3ba", tip_mass=m), 0.345)
        for r in (out.drape, out.lift):
            if r.converged:
                assert r.max_ke_ratio <= Q.RATIO_TOL


def test_ramp_doubling_moves_tip_less_than_1mm():
    chain = Q.build_chain("f3ba", tip_mass=3.0)
    T = Q.lift_ramp_duration(chain)
    a = Q.lift_test(chain, 0.345, ramp_duration=T)
    b = Q.lift_test(chain, 0.345, ramp_duration=2 * T, settle_time=40.0 + T)
    assert a.lift.converged and b.lift.converged
    assert math.dist(a.lift.tip_position, b.lift.tip_position) < 1e-3


def test_heavy_load_fails():
    assert not Q.lift_test(Q.build_chain("f3ba", tip_mass=7.0), 0.345).success


def test_zero_pressure_payload_is_zero():
    assert Q.max_payload("f3ba", 0.0) == 0.0


def test_single_link_matches_moment_oracle():
    # One rigid link on one hinge: the tip lifts level while tau >= g*L*(m/2 + M).
    L, m = 0.16, 0.37
    base = Q.ChainModel("f3ba", (L,), (m,), (0,), (0,), (TAU,), joint_angle_limit=2.0,
                        torque_falloff=False)
    lo, hi = 0.0, 20.0
    while hi - lo > 0.05:
        mid = 0.5 * (lo + hi)
        if Q.lift_test(base.with_tip_mass(mid), 0.345).success:
            lo = mid
        else:
            hi = mid
    oracle = O.moment_payload(TAU, L, m)
    assert abs(lo - oracle) / oracle < 0.15


def test_payload_monotone_in_arm_mass_and_length():
    light = Q.max_payload("f3ba", chain_kwargs={"component_mass": 0.2})
    heavy = Q.max_payload("f3ba", chain_kwargs={"component_mass": 0.8})
    assert light >= heavy
    assert Q.max_payload("fspl") <= Q.max_payload("f3ba")


def test_determinism():
    chain = Q.build_chain("f3ba", tip_mass=4.0)
    a = Q.lift_test(chain, 0.345).lift
    b = Q.lift_test(chain, 0.345).lift
    assert a.trace_csv() == b.trace_csv()
    assert a.to_dict() == b.to_dict()


def test_instability_is_raised(monkeypatch):
    real = Q.integration_params

    def starved(chain, dt=Q.DEFAULT_DT):
        p = real(chain, dt)
        return Q.IntegrationParams(p.inertia * 1e-6, p.damping * 0, p.stop_damping * 0,
                                   p.stop_stiffness, dt)

    monkeypatch.setattr(Q, "integration_params", starved)
    with pytest.raises(Q.SolverUnstable) as info:
        Q.simulate(Q.build_chain("f3ba"), Q.RampSchedule(1.0, 0.345), 2.0)
    assert info.value.result.status == 2


def test_result_serialisation():
    res = settle(Q.build_chain("f3ba"), time=5.0)
    d = res.to_dict()
    assert list(d) == ["converged", "max_ke_ratio", "tip_m", "steps"]
    assert res.trace_csv().splitlines()[0] == "t_s,ke_j,work_j,ratio,tip_x_m,tip_y_m"
