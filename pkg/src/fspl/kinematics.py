"""Constant-curvature kinematics and workspace estimation for the limb.

Everything here is pure geometry in SI units (m, rad internally; segment
bend limits and array azimuths are given in degrees). Gravity is ignored.

Each segment carries three actuator arrays at fixed azimuths around its
axis. Pressurizing an array bends the segment in the plane of that array,
and the three contributions add as vectors in the cross-section plane.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _core

# Inflating an array bends the segment away from it. Flip to +1.0 for the
# opposite convention; nothing else depends on the sign.
BEND_SIGN = -1.0

DEFAULT_AZIMUTHS = (90.0, 210.0, 330.0)
SEGMENT_LENGTH = 0.16
CONNECTOR_LENGTH = 0.0275
LIMB_LENGTH = 0.59
LIMB_MASS = 1.1
MAX_PRESSURE = 0.345

ORTHONORMAL_TOL = 1e-9
LENGTH_TOL = 1e-6
COPLANAR_TOL = 1e-12  # m
SAMPLE_DRAWS = 12  # doubles per sample: three Philox blocks, first nine used


class KinematicsError(ValueError):
    pass


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=np.float64)
        t = np.array(self.translation, dtype=np.float64)
        if R.shape != (3, 3) or t.shape != (3,):
            raise KinematicsError("pose needs a 3x3 rotation and a 3-vector translation")
        if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHONORMAL_TOL:
            raise KinematicsError("rotation is not orthonormal")
        if np.linalg.det(R) < 0:
            raise KinematicsError("rotation has det -1")
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    def __matmul__(self, other: "Pose") -> "Pose":
        return Pose(self.rotation @ other.rotation,
                    self.rotation @ other.translation + self.translation)

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation


# Limb axis along world +X (mounted parallel to the ground), gravity along Z,
# horizontal transverse direction along Y.
WORKSPACE_MOUNT = Pose(np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]]), np.zeros(3))
GRAVITY_AXIS = 2
TRANSVERSE_AXIS = 1


@dataclass(frozen=True)
class SegmentSpec:
    arc_length: float = SEGMENT_LENGTH
    theta_max: float = 180.0  # degrees
    p_max: float = MAX_PRESSURE  # MPa
    array_azimuths: tuple[float, float, float] = DEFAULT_AZIMUTHS  # degrees

    def __post_init__(self):
        if not (math.isfinite(self.arc_length) and self.arc_length > 0):
            raise KinematicsError(f"arc_length must be > 0, got {self.arc_length}")
        if not 0 < self.theta_max <= 360:
            raise KinematicsError(f"theta_max must lie in (0, 360], got {self.theta_max}")
        if not (math.isfinite(self.p_max) and self.p_max > 0):
            raise KinematicsError(f"p_max must be > 0, got {self.p_max}")
        az = tuple(float(a) for a in self.array_azimuths)
        if len(az) != 3:
            raise KinematicsError("a segment has exactly three arrays")
        wrapped = [a % 360.0 for a in az]
        if len(set(wrapped)) != 3:
            raise KinematicsError(f"array azimuths must be pairwise distinct, got {az}")
        object.__setattr__(self, "array_azimuths", az)

    @property
    def theta_max_rad(self) -> float:
        return math.radians(self.theta_max)

    def unit_vectors(self) -> np.ndarray:
        a = np.radians(self.array_azimuths)
        return np.stack([np.cos(a), np.sin(a)], axis=1)


@dataclass(frozen=True)
class LimbSpec:
    segments: tuple[SegmentSpec, ...]
    connector_lengths: tuple[float, ...]  # base mount, between segments, tip mount
    total_mass: float = LIMB_MASS
    base_frame: Pose = field(default_factory=Pose.identity)
    total_length: Optional[float] = None  # declared; checked against the parts

    def __post_init__(self):
        segs = tuple(self.segments)
        conn = tuple(float(c) for c in self.connector_lengths)
        if not segs:
            raise KinematicsError("limb needs at least one segment")
        if len(conn) != len(segs) + 1:
            raise KinematicsError(
                f"expected {len(segs) + 1} connector lengths for {len(segs)} segments, got {len(conn)}")
        if any(c < 0 or not math.isfinite(c) for c in conn):
            raise KinematicsError("connector lengths must be finite and >= 0")
        if not self.total_mass >= 0:
            raise KinematicsError(f"total_mass must be >= 0, got {self.total_mass}")
        built = self.length
        if self.total_length is not None and abs(built - self.total_length) > LENGTH_TOL:
            raise KinematicsError(
                f"segments and connectors sum to {built} m, declared total is {self.total_length} m")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "connector_lengths", conn)

    @property
    def length(self) -> float:
        return sum(s.arc_length for s in self.segments) + sum(self.connector_lengths)


def default_limb(base_frame: Optional[Pose] = None, segment: Optional[SegmentSpec] = None,
                 n_segments: int = 3, total_length: float = LIMB_LENGTH,
                 total_mass: float = LIMB_MASS) -> LimbSpec:
    """Three 0.16 m segments with the remaining length split over four connectors."""
    segment = segment or SegmentSpec()
    spare = total_length - n_segments * segment.arc_length
    if spare < -LENGTH_TOL:
        raise KinematicsError(f"segments are longer than the declared total {total_length} m")
    conn = (max(spare, 0.0) / (n_segments + 1),) * (n_segments + 1)
    return LimbSpec((segment,) * n_segments, conn, total_mass,
                    base_frame or Pose.identity(), total_length)


@dataclass(frozen=True)
class PressureCommand:
    pressures: tuple[tuple[float, float, float], ...]  # MPa, one triple per segment

    def __post_init__(self):
        triples = []
        for trip in self.pressures:
            trip = tuple(float(p) for p in trip)
            if len(trip) != 3:
                raise KinematicsError(f"each segment takes three pressures, got {len(trip)}")
            if any(not math.isfinite(p) or p < 0 for p in trip):
                raise KinematicsError(f"pressures must be finite and >= 0, got {trip}")
            triples.append(trip)
        object.__setattr__(self, "pressures", tuple(triples))

    @classmethod
    def zeros(cls, n_segments: int) -> "PressureCommand":
        return cls(((0.0, 0.0, 0.0),) * n_segments)

    def as_array(self) -> np.ndarray:
        return np.array(self.pressures, dtype=np.float64).reshape(-1, 3)


@dataclass(frozen=True)
class ArcParams:
    kappa: float  # 1/m
    psi: float  # rad
    ell: float  # m

    def __post_init__(self):
        if not self.kappa >= 0:
            raise KinematicsError(f"kappa must be >= 0, got {self.kappa}")
        if not self.ell > 0:
            raise KinematicsError(f"ell must be > 0, got {self.ell}")

    @property
    def theta(self) -> float:
        return self.kappa * self.ell


def _check_pressures(p: np.ndarray, spec: SegmentSpec):
    if p.shape != (3,):
        raise KinematicsError(f"expected a pressure triple, got shape {p.shape}")
    bad = (p < 0) | (p > spec.p_max) | ~np.isfinite(p)
    if bad.any():
        raise KinematicsError(f"pressures {tuple(p)} outside [0, {spec.p_max}] MPa")


def segment_arc(p: Sequence[float], spec: SegmentSpec) -> ArcParams:
    p = np.asarray(p, dtype=np.float64)
    _check_pressures(p, spec)
    u = spec.unit_vectors()
    b = BEND_SIGN * spec.theta_max_rad * (p / spec.p_max) @ u
    mag = float(math.hypot(b[0], b[1]))
    angle = min(mag, spec.theta_max_rad)
    psi = math.atan2(b[1], b[0]) if mag > 0 else 0.0
    return ArcParams(angle / spec.arc_length, psi, spec.arc_length)


def arc_transform(a: ArcParams) -> Pose:
    """Base-to-tip transform of a circular arc about the local z axis."""
    if a.kappa < _core.STRAIGHT_KAPPA:
        return Pose(np.eye(3), np.array([0.0, 0.0, a.ell]))
    th = a.theta
    r = 1.0 / a.kappa
    c, s = math.cos(a.psi), math.sin(a.psi)
    C, S = math.cos(th), math.sin(th)
    Rz = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    Ry = np.array([[C, 0.0, S], [0.0, 1.0, 0.0], [-S, 0.0, C]])
    R = Rz @ Ry @ Rz.T
    t = np.array([r * (1.0 - C) * c, r * (1.0 - C) * s, r * S])
    return Pose(R, t)


def _arc_points(a: ArcParams, count: int) -> np.ndarray:
    """Points along the arc in its base frame, base and tip included."""
    u = np.linspace(0.0, 1.0, count)
    if a.kappa < _core.STRAIGHT_KAPPA:
        return np.stack([np.zeros(count), np.zeros(count), u * a.ell], axis=1)
    th = u * a.theta
    r = 1.0 / a.kappa
    radial = r * (1.0 - np.cos(th))
    return np.stack([radial * math.cos(a.psi), radial * math.sin(a.psi), r * np.sin(th)], axis=1)


def _translate_z(d: float) -> Pose:
    return Pose(np.eye(3), np.array([0.0, 0.0, d]))


def forward_kinematics(limb: LimbSpec, cmd: PressureCommand,
                       points_per_segment: int = 20) -> tuple[Pose, np.ndarray]:
    """Tip pose and a backbone polyline (world frame) for one pressure command."""
    if len(cmd.pressures) != len(limb.segments):
        raise KinematicsError(
            f"command has {len(cmd.pressures)} segments, limb has {len(limb.segments)}")
    if points_per_segment < 2:
        raise KinematicsError("points_per_segment must be >= 2")
    frame = limb.base_frame
    pts = [frame.translation.copy()]
    frame = frame @ _translate_z(limb.connector_lengths[0])
    for seg, trip, conn in zip(limb.segments, cmd.pressures, limb.connector_lengths[1:]):
        arc = segment_arc(trip, seg)
        pts.extend(frame.apply(_arc_points(arc, points_per_segment)))
        frame = frame @ arc_transform(arc)
        frame = frame @ _translate_z(conn)
        pts.append(frame.translation.copy())
    return frame, np.array(pts)


def _kernel_inputs(limb: LimbSpec):
    segs = limb.segments
    ell = np.array([s.arc_length for s in segs])
    tmax = np.array([s.theta_max_rad for s in segs])
    u = np.array([s.unit_vectors() for s in segs])  # (S, 3, 2)
    ux = np.ascontiguousarray(u[:, :, 0])
    uy = np.ascontiguousarray(u[:, :, 1])
    conn = np.array(limb.connector_lengths)
    pmax = np.array([s.p_max for s in segs])
    return ell, tmax, ux, uy, conn, pmax


def tip_positions(limb: LimbSpec, pressures: np.ndarray) -> np.ndarray:
    """Vectorized tip positions for pressures of shape (N, S, 3) in MPa."""
    pressures = np.asarray(pressures, dtype=np.float64)
    ell, tmax, ux, uy, conn, pmax = _kernel_inputs(limb)
    if pressures.ndim != 3 or pressures.shape[1:] != (len(limb.segments), 3):
        raise KinematicsError(f"pressures must have shape (N, {len(limb.segments)}, 3)")
    frac = pressures / pmax[None, :, None]
    if (frac < 0).any() or (frac > 1).any() or not np.isfinite(frac).all():
        raise KinematicsError("pressures outside [0, p_max]")
    return _core.batch_tips(np.ascontiguousarray(frac), ell, tmax, ux, uy, conn, BEND_SIGN,
                            limb.base_frame.rotation, limb.base_frame.translation)


def sample_fractions(seed: int, start: int, count: int, n_segments: int) -> np.ndarray:
    """Uniform pressure fractions for samples ``start .. start+count-1``.

    Sample ``i`` always comes from Philox counter blocks ``3i .. 3i+2`` under
    key ``seed``, so any chunking of the index range yields the same values.
    """
    n_arrays = 3 * n_segments
    blocks = -(-n_arrays // 4)  # four doubles per Philox block
    bitgen = np.random.Philox(key=int(seed))
    bitgen.advance(blocks * start)
    draws = np.random.Generator(bitgen).random((count, 4 * blocks))
    return draws[:, :n_arrays].reshape(count, n_segments, 3)


def sample_workspace(limb: LimbSpec, n_samples: int, seed: int, *,
                     chunk_size: int = 16384, workers: Optional[int] = None) -> np.ndarray:
    """Tip positions for ``n_samples`` uniform random pressure commands."""
    if int(n_samples) != n_samples or n_samples < 1:
        raise KinematicsError(f"n_samples must be an integer >= 1, got {n_samples}")
    if int(seed) != seed or seed < 0:
        raise KinematicsError(f"seed must be a non-negative integer, got {seed}")
    n_samples = int(n_samples)
    n_seg = len(limb.segments)
    ell, tmax, ux, uy, conn, _ = _kernel_inputs(limb)
    R0, t0 = limb.base_frame.rotation, limb.base_frame.translation
    out = np.empty((n_samples, 3))

    def run(start):
        count = min(chunk_size, n_samples - start)
        frac = sample_fractions(seed, start, count, n_seg)
        out[start:start + count] = _core.batch_tips(frac, ell, tmax, ux, uy, conn, BEND_SIGN, R0, t0)

    starts = range(0, n_samples, chunk_size)
    workers = workers or min(4, os.cpu_count() or 1)
    if workers == 1 or len(starts) == 1:
        for s in starts:
            run(s)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    return out


@dataclass(frozen=True)
class WorkspaceReport:
    sample_count: int
    hull_volume: float  # m^3
    vertical_range: float  # m
    horizontal_range: float  # m
    max_reach: float  # m
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "samples": self.sample_count,
            "hull_volume_m3": self.hull_volume,
            "vertical_range_m": self.vertical_range,
            "horizontal_range_m": self.horizontal_range,
            "max_reach_m": self.max_reach,
            "seed": self.seed,
        }


def hull_volume(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=np.float64)
    if len(pts) < 4:
        return 0.0
    centred = pts - pts.mean(axis=0)
    # Flat clouds have no volume; qhull would either fail or return noise.
    if np.linalg.svd(centred, compute_uv=False)[-1] <= COPLANAR_TOL:
        return 0.0
    try:
        return float(ConvexHull(centred).volume)
    except QhullError:
        return 0.0


def hull_metrics(points, base=(0.0, 0.0, 0.0), seed: Optional[int] = None,
                 gravity_axis: int = GRAVITY_AXIS, transverse_axis: int = TRANSVERSE_AXIS) -> WorkspaceReport:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise KinematicsError("points must have shape (N, 3)")
    if len(pts) < 1:
        raise KinematicsError("need at least one point")
    vert = pts[:, gravity_axis]
    horiz = pts[:, transverse_axis]
    reach = np.linalg.norm(pts - np.asarray(base, dtype=np.float64), axis=1)
    return WorkspaceReport(
        sample_count=len(pts),
        hull_volume=hull_volume(pts),
        vertical_range=float(vert.max() - vert.min()),
        horizontal_range=float(horiz.max() - horiz.min()),
        max_reach=float(reach.max()),
        seed=seed,
    )


def workspace_report(limb: LimbSpec, n_samples: int, seed: int, **kwargs) -> tuple[WorkspaceReport, np.ndarray]:
    pts = sample_workspace(limb, n_samples, seed, **kwargs)
    return hull_metrics(pts, base=limb.base_frame.translation, seed=seed), pts


def points_csv(points: np.ndarray) -> str:
    lines = ["idx,x_m,y_m,z_m"]
    lines.extend(f"{i},{x!r},{y!r},{z!r}" for i, (x, y, z) in enumerate(points.tolist()))
    return "\n".join(lines) + "\n"
