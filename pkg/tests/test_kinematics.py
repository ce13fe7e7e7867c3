import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as O
from fspl import kinematics as K

SEG = K.SegmentSpec()
LIMB = K.default_limb()
PMAX = SEG.p_max


def rot_z(deg):
    a = math.radians(deg)
    return np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]])


def test_segment_arc_examples():
    assert K.segment_arc((0, 0, 0), SEG).kappa == 0.0
    a = K.segment_arc((PMAX, 0, 0), SEG)
    assert math.degrees(a.theta) == pytest.approx(180.0)
    assert math.degrees(a.psi) == pytest.approx(-90.0)
    assert a.kappa == pytest.approx(19.63, abs=0.01)
    assert K.segment_arc((PMAX, PMAX, PMAX), SEG).kappa == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(K.KinematicsError):
        K.segment_arc((PMAX * 1.01, 0, 0), SEG)
    with pytest.raises(K.KinematicsError):
        K.segment_arc((-0.01, 0, 0), SEG)


def test_bend_direction_is_away_from_inflated_array():
    a = K.segment_arc((0.1, 0, 0), SEG)
    tip = K.arc_transform(a).translation
    u = SEG.unit_vectors()[0]
    assert tip[:2] @ u < 0


def test_arc_transform_examples():
    straight = K.arc_transform(K.ArcParams(0.0, 0.3, 0.16))
    assert np.allclose(straight.translation, [0, 0, 0.16]) and np.allclose(straight.rotation, np.eye(3))
    semi = K.arc_transform(K.ArcParams(math.pi / 0.16, 0.0, 0.16))
    assert np.allclose(semi.translation, O.semicircle_tip(0.16), atol=1e-6)
    quarter = K.arc_transform(K.ArcParams(math.pi / 2 / 0.16, 0.0, 0.16))
    R = 0.16 / (math.pi / 2)
    assert np.allclose(quarter.translation, [R, 0, R], atol=1e-6)


@given(st.floats(0, 19.6), st.floats(-math.pi, math.pi), st.floats(0.01, 1.0))
def test_arc_pose_is_rigid(kappa, psi, ell):
    p = K.arc_transform(K.ArcParams(kappa, psi, ell))
    assert np.allclose(p.rotation.T @ p.rotation, np.eye(3), atol=1e-9)
    assert np.linalg.det(p.rotation) == pytest.approx(1.0, abs=1e-9)
    # The arc's tip tangent is the rotated local axis, and the chord stays within the arc length.
    assert np.linalg.norm(p.translation) <= ell + 1e-12


def test_pose_validation():
    with pytest.raises(K.KinematicsError):
        K.Pose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(K.KinematicsError):
        K.Pose(np.ones((3, 3)), np.zeros(3))


def test_limb_length_validation():
    assert LIMB.length == pytest.approx(0.59, abs=1e-12)
    assert LIMB.connector_lengths == pytest.approx((0.0275,) * 4)
    with pytest.raises(K.KinematicsError):
        K.LimbSpec((SEG,) * 3, (0.0275,) * 4, total_length=0.60)
    with pytest.raises(K.KinematicsError):
        K.LimbSpec((SEG,) * 3, (0.0275,) * 3)


def test_zero_pressure_identity():
    for base in (K.Pose.identity(), K.WORKSPACE_MOUNT):
        limb = K.default_limb(base)
        tip, backbone = K.forward_kinematics(limb, K.PressureCommand.zeros(3))
        assert abs(np.linalg.norm(tip.translation - base.translation) - 0.59) < 1e-9
        assert np.allclose(tip.translation, base.translation + 0.59 * base.rotation[:, 2], atol=1e-9)
        assert len(backbone) >= 3 * 20


def test_segment_count_mismatch():
    with pytest.raises(K.KinematicsError):
        K.forward_kinematics(LIMB, K.PressureCommand.zeros(2))


def test_proximal_segment_composition():
    cmd = K.PressureCommand(((PMAX, 0, 0), (0, 0, 0), (0, 0, 0)))
    tip, _ = K.forward_kinematics(LIMB, cmd)
    c = 0.0275
    T = K.Pose(np.eye(3), [0, 0, c])
    T = T @ K.arc_transform(K.segment_arc((PMAX, 0, 0), SEG))
    T = T @ K.Pose(np.eye(3), [0, 0, c + 0.16 + c + 0.16 + c])
    assert np.allclose(tip.translation, T.translation, atol=1e-12)
    assert np.allclose(tip.rotation, T.rotation, atol=1e-12)


pressure = st.floats(0, PMAX)
triple = st.tuples(pressure, pressure, pressure)


@given(st.tuples(triple, triple, triple))
def test_120_degree_equivariance(trips):
    base, _ = K.forward_kinematics(LIMB, K.PressureCommand(trips))
    # Array i takes array i-1's pressure: the same field rotated by +120 degrees.
    shifted = tuple((t[2], t[0], t[1]) for t in trips)
    rot, _ = K.forward_kinematics(LIMB, K.PressureCommand(shifted))
    assert np.allclose(rot.translation, rot_z(120) @ base.translation, atol=1e-9)
    assert np.linalg.norm(rot.translation) == pytest.approx(np.linalg.norm(base.translation), abs=1e-9)


@given(st.tuples(triple, triple, triple))
def test_bend_saturation_and_reach(trips):
    for t in trips:
        a = K.segment_arc(t, SEG)
        assert a.theta <= math.pi + 1e-12
    tip, backbone = K.forward_kinematics(LIMB, K.PressureCommand(trips))
    assert np.linalg.norm(tip.translation) <= 0.59 + 1e-9
    seg_len = np.linalg.norm(np.diff(backbone, axis=0), axis=1).sum()
    assert seg_len <= 0.59 + 1e-9


def test_batch_matches_single():
    rng = np.random.default_rng(3)
    P = rng.uniform(0, PMAX, (50, 3, 3))
    batch = K.tip_positions(LIMB, P)
    single = np.array([K.forward_kinematics(LIMB, K.PressureCommand(p))[0].translation for p in P])
    assert np.allclose(batch, single, atol=1e-12)


def test_sampling_determinism():
    limb = K.default_limb(K.WORKSPACE_MOUNT)
    a = K.sample_workspace(limb, 1, 11)
    b = K.sample_workspace(limb, 1, 11)
    assert a.shape == (1, 3) and np.array_equal(a, b)
    big = K.sample_workspace(limb, 5000, 11, chunk_size=5000, workers=1)
    chunked = K.sample_workspace(limb, 5000, 11, chunk_size=333, workers=4)
    assert np.array_equal(big, chunked)
    assert np.array_equal(big[:1], a)
    assert not np.array_equal(K.sample_workspace(limb, 10, 12), big[:10])


def test_sampling_errors():
    with pytest.raises(K.KinematicsError):
        K.sample_workspace(LIMB, 0, 1)
    with pytest.raises(K.KinematicsError):
        K.sample_workspace(LIMB, 10, -1)


def test_sample_reach_bound():
    limb = K.default_limb(K.WORKSPACE_MOUNT)
    pts = K.sample_workspace(limb, 100_000, 42)
    assert np.all(np.linalg.norm(pts, axis=1) <= 0.59 + 1e-9)


def test_hull_known_solids():
    cube = np.array(list(itertools.product([0.0, 1.0], repeat=3)))
    assert K.hull_metrics(cube).hull_volume == pytest.approx(1.0, abs=1e-9)
    tet = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float) / (2 * math.sqrt(2))
    assert K.hull_metrics(tet).hull_volume == pytest.approx(O.tetra_volume(), abs=1e-9)
    assert O.tetra_volume() == pytest.approx(math.sqrt(2) / 12)


def test_hull_degenerate():
    flat = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float)
    rep = K.hull_metrics(flat)
    assert rep.hull_volume == 0.0 and rep.horizontal_range == 1.0 and rep.vertical_range == 0.0
    assert K.hull_metrics(np.zeros((1, 3))).hull_volume == 0.0
    assert K.hull_metrics(np.eye(3)).hull_volume == 0.0
    with pytest.raises(K.KinematicsError):
        K.hull_metrics(np.zeros((0, 3)))


@given(st.integers(0, 10_000))
def test_hull_matches_brute_force(seed):
    pts = np.random.default_rng(seed).normal(size=(12, 3))
    assert K.hull_volume(pts) == pytest.approx(O.brute_hull_volume(pts), rel=1e-9)


@given(st.integers(0, 10_000))
def test_hull_invariances(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(200, 3))
    v = K.hull_volume(pts)
    assert K.hull_volume(rng.permutation(pts)) == pytest.approx(v, rel=1e-9)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    assert K.hull_volume(pts @ q.T + rng.normal(size=3)) == pytest.approx(v, rel=1e-9)


def test_report_json_keys():
    rep = K.hull_metrics(np.random.default_rng(0).normal(size=(20, 3)), seed=5)
    assert list(rep.to_dict()) == ["samples", "hull_volume_m3", "vertical_range_m",
                                   "horizontal_range_m", "max_reach_m", "seed"]


def test_points_csv():
    text = K.points_csv(np.array([[0.0, 1.0, 2.0]]))
    assert text == "idx,x_m,y_m,z_m\n0,0.0,1.0,2.0\n"
