"""Planar dynamic relaxation of pouch-hinge chains under pressure and gravity.

A component is modelled as rigid links in the vertical plane. Every pouch gap
is a hinge driven by the component's base moment, with a weak torsional spring
and stiff one-sided stops at the pouch closing angle. Connectors are rigid
links without hinges. The base is clamped horizontally at the origin, the
chain initially extends along +x, and gravity acts along -y.

Equilibrium is found by integrating damped dynamics slowly enough that the
motion stays quasi-static, and the run counts as settled only once kinetic
energy is a small fraction of the work done on the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import _core
from .geometry import ArrayGeometry, solve_design
from .materials import actuator_wave_speed
from .mechanics import (
    CALIBRATION_PRESSURE,
    F3BA_LENGTH,
    F3BA_MASS,
    FSPL_DISTAL_PRESSURE,
    FSPL_LENGTH,
    FSPL_MASS,
    G,
    MomentModel,
    f3ba_moment_model,
)

COMPONENTS = ("array", "f3ba", "fspl")
ARRAY_MASS = F3BA_MASS / 3.0  # one of the segment's three arrays
FSPL_SEGMENTS = 3
DEFAULT_STIFFNESS = 0.05  # N*m/rad
STOP_FACTOR = 100.0
DEFAULT_DT = 1e-4  # s
DT_SAFETY = 0.2
RATIO_TOL = 0.05
ACC_TOL = 1e-3  # rad/s^2
DRIFT_TOL = 1e-4  # m, tip travel allowed within the settling window
SETTLE_FRACTION = 0.1
FSPL_PAYLOAD_PRESSURES = (CALIBRATION_PRESSURE, CALIBRATION_PRESSURE, FSPL_DISTAL_PRESSURE)


class QuasiStaticError(ValueError):
    pass


class SolverUnstable(QuasiStaticError):
    """Raised when kinetic energy runs away from the work input."""

    def __init__(self, message: str, result: "QuasiStaticResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class ChainModel:
    component: str
    link_lengths: tuple[float, ...]  # m
    link_masses: tuple[float, ...]  # kg
    joint_links: tuple[int, ...]  # link index driven by each hinge
    joint_segments: tuple[int, ...]  # pressure channel of each hinge
    joint_torque_scale: tuple[float, ...]  # N*m at p_cal
    p_cal: float = CALIBRATION_PRESSURE  # MPa
    p_max: float = CALIBRATION_PRESSURE  # MPa
    joint_angle_limit: float = math.pi / 19  # rad, symmetric
    joint_stiffness: float = DEFAULT_STIFFNESS
    joint_damping: Optional[float] = None  # N*m*s/rad; None picks near-critical per hinge
    tip_mass: float = 0.0
    gravity: float = G
    torque_falloff: bool = True
    wave_speed: float = field(default_factory=actuator_wave_speed)  # m/s

    def __post_init__(self):
        L = tuple(float(x) for x in self.link_lengths)
        M = tuple(float(x) for x in self.link_masses)
        if len(L) < 1:
            raise QuasiStaticError("chain needs at least one link")
        if len(M) != len(L):
            raise QuasiStaticError("one mass per link")
        if any(not (x > 0 and math.isfinite(x)) for x in L):
            raise QuasiStaticError("link lengths must be > 0")
        if any(not (x >= 0 and math.isfinite(x)) for x in M):
            raise QuasiStaticError("link masses must be >= 0")
        jl = tuple(int(j) for j in self.joint_links)
        if not jl:
            raise QuasiStaticError("chain needs at least one hinge")
        if any(b <= a for a, b in zip(jl, jl[1:])) or jl[0] < 0 or jl[-1] >= len(L):
            raise QuasiStaticError("joint_links must be increasing link indices")
        if not (len(self.joint_segments) == len(jl) == len(self.joint_torque_scale)):
            raise QuasiStaticError("joint_segments and joint_torque_scale need one entry per hinge")
        if not (self.joint_angle_limit > 0):
            raise QuasiStaticError("joint_angle_limit must be > 0")
        if self.joint_stiffness < 0 or self.tip_mass < 0 or self.gravity < 0:
            raise QuasiStaticError("stiffness, tip mass and gravity must be >= 0")
        if self.joint_damping is not None and self.joint_damping < 0:
            raise QuasiStaticError("joint_damping must be >= 0")
        if not (self.p_cal > 0 and self.p_max > 0 and self.wave_speed > 0):
            raise QuasiStaticError("p_cal, p_max and wave_speed must be > 0")
        object.__setattr__(self, "link_lengths", L)
        object.__setattr__(self, "link_masses", M)
        object.__setattr__(self, "joint_links", jl)
        object.__setattr__(self, "joint_segments", tuple(int(s) for s in self.joint_segments))
        object.__setattr__(self, "joint_torque_scale", tuple(float(t) for t in self.joint_torque_scale))

    @property
    def n_links(self) -> int:
        return len(self.link_lengths)

    @property
    def n_joints(self) -> int:
        return len(self.joint_links)

    @property
    def n_segments(self) -> int:
        return max(self.joint_segments) + 1

    @property
    def length(self) -> float:
        return math.fsum(self.link_lengths)

    @property
    def mass(self) -> float:
        return math.fsum(self.link_masses)

    def with_tip_mass(self, tip_mass: float) -> "ChainModel":
        return replace(self, tip_mass=float(tip_mass))


def _uniform_links(n: int, length: float, mass: float):
    return [length / n] * n, [mass / n] * n


def build_chain(component: str, geom: Optional[ArrayGeometry] = None,
                model: Optional[MomentModel] = None, tip_mass: float = 0.0, *,
                theta_n: float = 180.0, joint_stiffness: float = DEFAULT_STIFFNESS,
                joint_damping: Optional[float] = None, torque_falloff: bool = True,
                gravity: float = G, wave_speed: Optional[float] = None,
                component_mass: Optional[float] = None) -> ChainModel:
    """One hinge per pouch gap, each driven by the full base moment of ``model``.

    ``component_mass`` overrides the measured mass of the component.
    """
    if component not in COMPONENTS:
        raise QuasiStaticError(f"unknown component {component!r}; expected one of {COMPONENTS}")
    geom = geom or solve_design(19, 2.0)
    model = model or f3ba_moment_model()
    n = int(geom.n)
    tau = model.tau_cal
    if component in ("array", "f3ba"):
        mass = ARRAY_MASS if component == "array" else F3BA_MASS
        mass = mass if component_mass is None else component_mass
        lengths, masses = _uniform_links(n, F3BA_LENGTH, mass)
        joints = list(range(n))
        segments = [0] * n
    else:
        active = FSPL_SEGMENTS * F3BA_LENGTH
        conn = (FSPL_LENGTH - active) / (FSPL_SEGMENTS + 1)
        lengths, joints, segments = [conn], [], []
        for s in range(FSPL_SEGMENTS):
            for _ in range(n):
                joints.append(len(lengths))
                segments.append(s)
                lengths.append(F3BA_LENGTH / n)
            lengths.append(conn)
        # Mass spread uniformly along the limb, connectors included.
        mass = FSPL_MASS if component_mass is None else component_mass
        masses = [mass * l / FSPL_LENGTH for l in lengths]
        masses[-1] = mass - math.fsum(masses[:-1])
    return ChainModel(
        component=component,
        link_lengths=tuple(lengths),
        link_masses=tuple(masses),
        joint_links=tuple(joints),
        joint_segments=tuple(segments),
        joint_torque_scale=(tau,) * len(joints),
        p_cal=model.p_cal,
        p_max=model.p_cal,
        joint_angle_limit=math.radians(theta_n) / n,
        joint_stiffness=joint_stiffness,
        joint_damping=joint_damping,
        tip_mass=tip_mass,
        gravity=gravity,
        torque_falloff=torque_falloff,
        wave_speed=wave_speed if wave_speed is not None else actuator_wave_speed(),
    )


def min_ramp_duration(length: float, wave_speed: float) -> float:
    """Ramp time that loads 100x slower than one stress-wave transit."""
    if not (length > 0 and wave_speed > 0):
        raise QuasiStaticError("length and wave_speed must be > 0")
    return 100.0 * length / wave_speed


@dataclass(frozen=True)
class RampSchedule:
    duration: float  # s
    target_pressure: tuple[float, ...]  # MPa per pressure channel
    start_pressure: Optional[tuple[float, ...]] = None  # defaults to zero

    def __post_init__(self):
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise QuasiStaticError(f"ramp duration must be >= 0, got {self.duration}")
        tgt = _as_tuple(self.target_pressure)
        start = (0.0,) * len(tgt) if self.start_pressure is None else _as_tuple(self.start_pressure)
        if len(start) != len(tgt):
            raise QuasiStaticError("start and target pressures differ in length")
        if any(p < 0 or not math.isfinite(p) for p in tgt + start):
            raise QuasiStaticError("pressures must be finite and >= 0")
        object.__setattr__(self, "target_pressure", tgt)
        object.__setattr__(self, "start_pressure", start)


def _as_tuple(p) -> tuple[float, ...]:
    if np.ndim(p) == 0:
        return (float(p),)
    return tuple(float(x) for x in p)


@dataclass(frozen=True)
class QuasiStaticResult:
    converged: bool
    final_angles: np.ndarray  # rad per hinge
    tip_position: tuple[float, float]  # m
    times: np.ndarray
    ke_trace: np.ndarray  # J
    work_trace: np.ndarray  # J
    ratio_trace: np.ndarray
    tip_trace: np.ndarray  # (T, 2) m
    dissipated_trace: np.ndarray  # J
    audit_trace: np.ndarray  # J, work-energy residual
    max_ke_ratio: float  # over the settling window
    mean_abs_acc: float  # rad/s^2 over the settling window
    steps: int
    dt: float
    status: int

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "max_ke_ratio": _json_float(self.max_ke_ratio),
            "tip_m": [self.tip_position[0], self.tip_position[1]],
            "steps": self.steps,
        }

    def trace_csv(self) -> str:
        lines = ["t_s,ke_j,work_j,ratio,tip_x_m,tip_y_m"]
        for row in zip(self.times.tolist(), self.ke_trace.tolist(), self.work_trace.tolist(),
                       self.ratio_trace.tolist(), self.tip_trace[:, 0].tolist(),
                       self.tip_trace[:, 1].tolist()):
            lines.append(",".join(repr(v) for v in row))
        return "\n".join(lines) + "\n"


def _json_float(x: float):
    return x if math.isfinite(x) else None


@dataclass(frozen=True)
class IntegrationParams:
    inertia: np.ndarray
    damping: np.ndarray
    stop_damping: np.ndarray
    stop_stiffness: float
    dt: float


def integration_params(chain: ChainModel, dt: float = DEFAULT_DT) -> IntegrationParams:
    """Lumped hinge inertias, damping and the stable step for ``chain``.

    Each hinge gets the inertia of everything distal to it in the straight
    pose. Inertias are raised where needed so that ``dt`` satisfies the
    explicit stability margin against the stiffest local spring (hinge
    spring, stop and a Gershgorin bound on the gravity stiffness). Scaling
    mass this way changes the transient, never the equilibrium.
    """
    L = np.array(chain.link_lengths)
    M = np.array(chain.link_masses)
    jl = np.array(chain.joint_links)
    s = np.concatenate([[0.0], np.cumsum(L)])
    total = s[-1]
    com = s[:-1] + 0.5 * L
    g = chain.gravity
    tip = chain.tip_mass
    inertia = np.array([
        np.sum(M[a:] * (L[a:] ** 2 / 12.0 + (com[a:] - s[a]) ** 2)) + tip * (total - s[a]) ** 2
        for a in jl
    ])
    moment = np.array([g * (np.sum(M[a:] * (com[a:] - s[a])) + tip * (total - s[a])) for a in jl])
    idx = np.maximum.outer(np.arange(len(jl)), np.arange(len(jl)))
    k_grav = moment[idx].sum(axis=1)
    k = chain.joint_stiffness
    lim = chain.joint_angle_limit
    if math.isfinite(lim):
        k_stop = STOP_FACTOR * max(k, max(chain.joint_torque_scale) / lim)
    else:
        k_stop = 0.0
    k_eff = k + k_stop + k_grav
    inertia = np.maximum(inertia, k_eff * (dt / DT_SAFETY) ** 2)
    inertia = np.maximum(inertia, 1e-12)
    step = min(dt, DT_SAFETY * float(np.min(np.sqrt(inertia / np.maximum(k_eff, 1e-300)))))
    if chain.joint_damping is None:
        damping = 2.0 * np.sqrt((k + k_grav) * inertia)
    else:
        damping = np.full(len(jl), float(chain.joint_damping))
    stop_damping = 2.0 * np.sqrt(k_stop * inertia)
    return IntegrationParams(inertia, damping, stop_damping, k_stop, step)


def _levels(chain: ChainModel, pressures: tuple[float, ...]) -> np.ndarray:
    if len(pressures) == 1 and chain.n_segments > 1:
        pressures = pressures * chain.n_segments
    if len(pressures) != chain.n_segments:
        raise QuasiStaticError(
            f"{chain.component} takes {chain.n_segments} pressure(s), got {len(pressures)}")
    for p in pressures:
        if p > chain.p_max + 1e-12:
            raise QuasiStaticError(f"pressure {p} MPa exceeds p_max {chain.p_max} MPa")
    seg = np.array(chain.joint_segments)
    return np.array(pressures)[seg] / chain.p_cal


def _relax(chain: ChainModel, ramp: RampSchedule, max_time: float, q0, dt: float = DEFAULT_DT,
           acc_tol: float = ACC_TOL, ratio_tol: float = RATIO_TOL,
           settle_fraction: float = SETTLE_FRACTION, drift_tol: float = DRIFT_TOL,
           trace_stride: int = 100, check_stride: int = 100) -> QuasiStaticResult:
    params = integration_params(chain, dt)
    lv0 = _levels(chain, ramp.start_pressure)
    lv1 = _levels(chain, ramp.target_pressure)
    q0 = np.zeros(chain.n_joints) if q0 is None else np.asarray(q0, dtype=np.float64)
    if q0.shape != (chain.n_joints,):
        raise QuasiStaticError(f"q0 must have {chain.n_joints} entries")
    step = params.dt
    max_steps = max(1, int(math.ceil(max_time / step - 1e-9)))
    q, _, steps, status, trace, win_ratio, win_acc = _core.relax_chain(
        np.array(chain.link_lengths), np.array(chain.link_masses), np.array(chain.joint_links),
        np.array(chain.joint_torque_scale), lv0, lv1, float(ramp.duration), float(chain.tip_mass),
        float(chain.gravity), float(chain.joint_stiffness), float(params.stop_stiffness),
        float(chain.joint_angle_limit), bool(chain.torque_falloff), params.inertia, params.damping,
        params.stop_damping, q0, float(step), int(max_steps), int(trace_stride), int(check_stride),
        float(acc_tol), float(ratio_tol), float(settle_fraction), 0.0, 0.0, float(drift_tol),
    )
    result = QuasiStaticResult(
        converged=status == _core.STATUS_CONVERGED,
        final_angles=np.asarray(q),
        tip_position=(float(trace[-1, 4]), float(trace[-1, 5])),
        times=trace[:, 0].copy(),
        ke_trace=trace[:, 1].copy(),
        work_trace=trace[:, 2].copy(),
        ratio_trace=trace[:, 3].copy(),
        tip_trace=trace[:, 4:6].copy(),
        dissipated_trace=trace[:, 6].copy(),
        audit_trace=trace[:, 7].copy(),
        max_ke_ratio=float(win_ratio),
        mean_abs_acc=float(win_acc),
        steps=int(steps),
        dt=float(step),
        status=int(status),
    )
    if status == _core.STATUS_UNSTABLE:
        raise SolverUnstable(f"solver unstable after {steps} steps (KE exceeded 10x peak work)", result)
    return result


def simulate(chain: ChainModel, ramp: RampSchedule, max_time: float, *, q0=None,
             dt: float = DEFAULT_DT, acc_tol: float = ACC_TOL, ratio_tol: float = RATIO_TOL,
             settle_fraction: float = SETTLE_FRACTION, drift_tol: float = DRIFT_TOL,
             trace_stride: int = 100, check_stride: int = 100) -> QuasiStaticResult:
    """Ramp the pressures and integrate until the chain settles or time runs out.

    Raises :class:`SolverUnstable` on divergence; a timeout returns a result
    with ``converged=False``.
    """
    floor = min_ramp_duration(chain.length, chain.wave_speed)
    if ramp.start_pressure != ramp.target_pressure and ramp.duration < floor:
        raise QuasiStaticError(f"ramp duration {ramp.duration} s is below the minimum {floor:.6g} s")
    if max_time < 2.0 * ramp.duration:
        raise QuasiStaticError(f"max_time must be >= 2x ramp duration ({2 * ramp.duration} s)")
    if not (0 < settle_fraction < 1):
        raise QuasiStaticError("settle_fraction must lie in (0, 1)")
    return _relax(chain, ramp, max_time, q0, dt, acc_tol, ratio_tol, settle_fraction,
                  drift_tol, trace_stride, check_stride)


def lift_ramp_duration(chain: ChainModel) -> float:
    """A few pendulum periods of the whole chain: slow enough to lift without swinging."""
    pendulum = 2.0 * math.pi * math.sqrt(chain.length / max(chain.gravity, 1e-12))
    return max(min_ramp_duration(chain.length, chain.wave_speed), 4.0 * pendulum)


@dataclass(frozen=True)
class LiftOutcome:
    success: bool
    drape: QuasiStaticResult
    lift: QuasiStaticResult


def lift_test(chain: ChainModel, pressures, *, horizontal_tolerance: float = 0.01,
              ramp_duration: Optional[float] = None, drape_time: float = 30.0,
              settle_time: float = 40.0, **kwargs) -> LiftOutcome:
    """Free-space loading: let the deflated chain hang, then inflate slowly.

    Success means the lift run settled with the tip no lower than the base
    minus ``horizontal_tolerance``.
    """
    pressures = _as_tuple(pressures)
    zero = (0.0,) * len(pressures)
    drape = _relax(chain, RampSchedule(0.0, zero), drape_time, None, **kwargs)
    T = lift_ramp_duration(chain) if ramp_duration is None else ramp_duration
    lift = simulate(chain, RampSchedule(T, pressures, zero), max(T + settle_time, 2.0 * T),
                    q0=drape.final_angles, **kwargs)
    ok = lift.converged and lift.tip_position[1] >= -horizontal_tolerance
    return LiftOutcome(ok, drape, lift)


@dataclass(frozen=True)
class PayloadSearch:
    mass: float  # kg, largest successful tip mass
    probes: tuple[tuple[float, bool], ...]
    pressure: tuple[float, ...]
    component: str


def payload_search(component: str, pressure: Union[float, Sequence[float], None] = None, *,
                   geom: Optional[ArrayGeometry] = None, model: Optional[MomentModel] = None,
                   horizontal_tolerance: float = 0.01, bracket: tuple[float, float] = (0.0, 20.0),
                   tol: float = 0.05, chain_kwargs: Optional[dict] = None,
                   **lift_kwargs) -> PayloadSearch:
    """Bisect on tip mass for the heaviest load the component still lifts level."""
    if pressure is None:
        pressure = FSPL_PAYLOAD_PRESSURES if component == "fspl" else CALIBRATION_PRESSURE
    pressure = _as_tuple(pressure)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0 <= lo < hi) or not tol > 0:
        raise QuasiStaticError("need 0 <= lo < hi and tol > 0")
    base = build_chain(component, geom, model, 0.0, **(chain_kwargs or {}))
    _levels(base, pressure)  # validate before spending time
    probes = []

    def ok(m):
        res = lift_test(base.with_tip_mass(m), pressure,
                        horizontal_tolerance=horizontal_tolerance, **lift_kwargs).success
        probes.append((m, res))
        return res

    if not ok(lo):
        return PayloadSearch(0.0, tuple(probes), pressure, component)
    if ok(hi):
        return PayloadSearch(hi, tuple(probes), pressure, component)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return PayloadSearch(lo, tuple(probes), pressure, component)


def max_payload(component: str, pressure=None, horizontal_tolerance: float = 0.01, **kwargs) -> float:
    return payload_search(component, pressure, horizontal_tolerance=horizontal_tolerance, **kwargs).mass
