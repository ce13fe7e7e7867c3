"""Calibrated static force and moment surrogates, plus the (n, r) design sweep.

Two linear-in-pressure models are kept apart on purpose. The flat-plate test
of a single array is a contact measurement (force scales with pouch face
area), while the segment and whole-limb tests are cantilever bending against
a tip sensor, where the base joint moment ``F * L`` is the invariant quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .geometry import ArrayGeometry, DesignConstraints, GeometryError, max_feasible_n, solve_design

G = 9.81

# Blocked (UTM) tip forces in N and masses in kg measured on the prototype.
ARRAY_BLOCKED_FORCE = 174.73
ARRAY_BLOCKED_FORCE_STD = 6.37
F3BA_BLOCKED_FORCE = 53.73
F3BA_BLOCKED_FORCE_STD = 1.04
FSPL_BLOCKED_FORCE = 14.91
FSPL_BLOCKED_FORCE_STD = 0.93
CALIBRATION_PRESSURE = 0.345  # MPa
F3BA_LENGTH = 0.16  # m
FSPL_LENGTH = 0.59  # m
F3BA_MASS = 0.37  # kg
FSPL_MASS = 1.1  # kg
F3BA_FREE_PAYLOAD = 6.0  # kg, free-space loading
FSPL_FREE_PAYLOAD = 1.5  # kg
FSPL_DISTAL_PRESSURE = 0.207  # MPa
SUCTION_CUP_PAYLOAD = 0.86  # kg, rated


class MechanicsError(ValueError):
    pass


def _positive(**values):
    for name, v in values.items():
        if not (math.isfinite(v) and v > 0):
            raise MechanicsError(f"{name} must be > 0, got {v}")


@dataclass(frozen=True)
class ContactForceModel:
    c_a: float
    p_cal: float  # MPa
    geometry: ArrayGeometry
    burst_pressure: Optional[float] = None  # MPa; None disables the burst check

    def __post_init__(self):
        _positive(c_a=self.c_a, p_cal=self.p_cal)


@dataclass(frozen=True)
class MomentModel:
    tau_cal: float  # N*m at p_cal
    p_cal: float  # MPa
    length: float  # m

    def __post_init__(self):
        _positive(tau_cal=self.tau_cal, p_cal=self.p_cal, length=self.length)

    def tau(self, pressure: float) -> float:
        return self.tau_cal * (pressure / self.p_cal)


def calibrate_contact(force: float, pressure: float, geom: ArrayGeometry,
                      burst_pressure: Optional[float] = None) -> ContactForceModel:
    """Fit ``F = c_a * P * w_a * h_a`` through one measured point (SI units)."""
    _positive(force=force, pressure=pressure)
    if not geom.feasible:
        raise MechanicsError(f"geometry is infeasible ({geom.violation})")
    c_a = force / (pressure * 1e6 * geom.w_a_m * geom.h_a_m)
    return ContactForceModel(c_a, pressure, geom, burst_pressure)


def contact_force(model: ContactForceModel, pressure: float) -> float:
    if pressure < 0:
        raise MechanicsError(f"pressure must be >= 0, got {pressure}")
    if model.burst_pressure is not None and pressure > model.burst_pressure:
        raise MechanicsError(f"{pressure} MPa exceeds burst strength {model.burst_pressure} MPa")
    g = model.geometry
    return model.c_a * pressure * 1e6 * g.w_a_m * g.h_a_m


def calibrate_moment(blocked_tip_force: float, pressure: float, length: float) -> MomentModel:
    _positive(blocked_tip_force=blocked_tip_force, pressure=pressure, length=length)
    return MomentModel(blocked_tip_force * length, pressure, length)


def f3ba_moment_model() -> MomentModel:
    return calibrate_moment(F3BA_BLOCKED_FORCE, CALIBRATION_PRESSURE, F3BA_LENGTH)


def predict_blocked_force(model: MomentModel, pressure: float, length: float) -> float:
    """Tip force a straight cantilever of ``length`` can push with its base moment."""
    _positive(pressure=pressure, length=length)
    return model.tau(pressure) / length


def static_payload_estimate(model: MomentModel, pressure: float, length: float, arm_mass: float) -> float:
    """Tip mass the base moment can hold with the arm straight and horizontal.

    The arm's own weight acts at mid-length. Returns 0 when the moment cannot
    even carry the arm.
    """
    _positive(pressure=pressure, length=length, arm_mass=arm_mass)
    spare = model.tau(pressure) - arm_mass * G * length / 2.0
    return max(0.0, spare / (G * length))


def default_scorer(geom: ArrayGeometry) -> float:
    """Trend surrogate for array tip force: linear in n, peaked at r = 2.

    This is a qualitative ordering of designs, not a force prediction: more
    pouches give more force, and force grows with the width ratio up to 2 and
    falls beyond it.
    """
    if not geom.feasible:
        raise MechanicsError(f"cannot score infeasible geometry ({geom.violation})")
    r = geom.r
    shape = r / 2.0 if r <= 2.0 else 1.0 - 0.25 * (r - 2.0)
    return geom.n * shape


@dataclass(frozen=True)
class SweepRow:
    n: int
    r: float
    geometry: ArrayGeometry
    score: Optional[float]
    feasible: bool


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best: tuple[int, float]


def ratio_grid(r_min: float, r_max: float, r_step: float) -> list[float]:
    if not r_step > 0:
        raise MechanicsError(f"r_step must be > 0, got {r_step}")
    if r_max < r_min:
        raise MechanicsError(f"r_max ({r_max}) < r_min ({r_min})")
    count = int(math.floor((r_max - r_min) / r_step + 1e-9)) + 1
    return [round(r_min + k * r_step, 10) for k in range(count)]


def _row_key(row: SweepRow):
    # Feasible rows first, by score descending, then larger n, then smaller r.
    if row.feasible:
        return (0, -row.score, -row.n, row.r)
    return (1, 0.0, -row.n, row.r)


def sweep_designs(c: DesignConstraints, r_grid: Iterable[float],
                  scorer: Callable[[ArrayGeometry], float] = default_scorer) -> SweepResult:
    r_grid = list(r_grid)
    if not r_grid:
        raise MechanicsError("r_grid must be non-empty")
    if any(r < 1.0 for r in r_grid):
        raise MechanicsError("ratios must be >= 1.0")
    try:
        n_hi = max_feasible_n(c)
    except GeometryError:
        raise MechanicsError("empty feasible set") from None
    if c.n_max is not None:
        n_hi = min(n_hi, c.n_max)

    rows = []
    for n in range(max(c.n_min, 3), n_hi + 1):
        for r in r_grid:
            geom = solve_design(n, r, c)
            score = scorer(geom) if geom.feasible else None
            rows.append(SweepRow(n, r, geom, score, geom.feasible))
    rows.sort(key=_row_key)
    if not rows or not rows[0].feasible:
        raise MechanicsError("empty feasible set")
    return SweepResult(tuple(rows), (rows[0].n, rows[0].r))


def sweep_rows_csv(result: SweepResult) -> str:
    lines = ["n,r,s_p_mm,h_a_mm,w_a_mm,w_a_ceiling_mm,feasible,score"]
    for row in result.rows:
        g = row.geometry
        score = "" if row.score is None else repr(row.score)
        lines.append(
            f"{row.n},{row.r!r},{g.s_p!r},{g.h_a!r},{g.w_a!r},{g.w_a_ceiling!r},"
            f"{str(row.feasible).lower()},{score}"
        )
    return "\n".join(lines) + "\n"

