"""Actuator-array sizing under the limb's physical constraints.

All lengths are millimetres and angles are degrees at this module's surface.

An array of ``n`` pouches spans the active length ``a_l``. The pouch spacing,
the active pouch height needed to curl the array through ``theta_n`` and the
largest pouch width that still fits the triangular limb cross-section follow
from closed-form expressions; :func:`solve_design` composes them and reports
feasibility instead of clamping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

SQRT3_6 = math.sqrt(3.0) / 6.0


class GeometryError(ValueError):
    """Raised when a geometric quantity is undefined for the given inputs."""


@dataclass(frozen=True)
class DesignConstraints:
    R_c: float = 50.0  # limb cross-section circumradius
    s_l: float = 5.0  # heat seam width
    f_l: float = 6.23  # tube fitting diameter
    a_l: float = 160.0  # array active length
    theta_n: float = 180.0  # full-inflation array angle, degrees
    s_p_min: float = 7.5  # sewing limit on pouch spacing
    n_min: int = 8
    P_max: float = 0.345  # MPa
    n_max: Optional[int] = None  # optional cap on the sweep range

    def __post_init__(self):
        for name in ("R_c", "s_l", "f_l", "a_l", "s_p_min", "P_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise GeometryError(f"{name} must be > 0, got {value}")
        if not 0 < self.theta_n <= 360:
            raise GeometryError(f"theta_n must lie in (0, 360], got {self.theta_n}")
        if int(self.n_min) != self.n_min or self.n_min < 1:
            raise GeometryError(f"n_min must be an integer >= 1, got {self.n_min}")
        if self.n_max is not None and (int(self.n_max) != self.n_max or self.n_max < self.n_min):
            raise GeometryError(f"n_max must be an integer >= n_min, got {self.n_max}")

    def with_(self, **changes) -> "DesignConstraints":
        return replace(self, **changes)


DEFAULT_CONSTRAINTS = DesignConstraints()


@dataclass(frozen=True)
class ArrayGeometry:
    n: int
    r: float
    s_p: float
    h_a: float
    w_a: float
    w_a_ceiling: float
    R_i: float
    feasible: bool
    violation: Optional[str] = None

    @property
    def h_a_m(self) -> float:
        return self.h_a * 1e-3

    @property
    def w_a_m(self) -> float:
        return self.w_a * 1e-3


def spacing(n: int, a_l: float) -> float:
    """Pouch spacing (a_l - 2 a_l / n) / n."""
    if n < 3:
        raise GeometryError(f"spacing undefined for n = {n} (need n >= 3)")
    return (a_l - 2.0 * (a_l / n)) / n


def active_height(n: int, theta_n: float, a_l: float) -> float:
    """Active pouch height for the array to sweep ``theta_n`` degrees."""
    s_p = spacing(n, a_l)
    if theta_n <= 0:
        raise GeometryError(f"theta_n must be > 0, got {theta_n}")
    half_angle = theta_n / (2.0 * n)
    if half_angle >= 90.0:
        raise GeometryError(f"denominator nonpositive: theta_n/(2n) = {half_angle} deg >= 90 deg")
    return s_p * math.pi / (2.0 * (1.0 - math.sin(math.radians(half_angle))))


def width_ceiling(r: float, R_c: float, s_l: float, f_l: float) -> float:
    """Largest active width that fits the cross-section; may be <= 0 (infeasible)."""
    if not r > 0:
        raise GeometryError(f"ratio r must be > 0, got {r}")
    return R_c / (SQRT3_6 + 1.0 / r) - 2.0 * s_l - f_l


def inradius(w_a: float, s_l: float, f_l: float) -> float:
    # Inradius of the equilateral section whose side is the full pouch face
    # (active width plus both seams and the fitting).
    return SQRT3_6 * (w_a + 2.0 * s_l + f_l)


def solve_design(n: int, r: float, c: DesignConstraints = DEFAULT_CONSTRAINTS) -> ArrayGeometry:
    if n < 3:
        raise GeometryError(f"spacing undefined for n = {n} (need n >= 3)")
    if r < 1.0:
        raise GeometryError(f"ratio r must be >= 1.0, got {r}")
    s_p = spacing(n, c.a_l)
    h_a = active_height(n, c.theta_n, c.a_l)
    w_a = r * h_a
    ceiling = width_ceiling(r, c.R_c, c.s_l, c.f_l)

    violation = None
    if s_p < c.s_p_min:
        violation = "s_p < s_p_min"
    elif ceiling <= 0:
        violation = "w_a_ceiling <= 0"
    elif w_a > ceiling:
        violation = "w_a > w_a_ceiling"
    elif n < c.n_min:
        violation = "n < n_min"
    return ArrayGeometry(
        n=n,
        r=r,
        s_p=s_p,
        h_a=h_a,
        w_a=w_a,
        w_a_ceiling=ceiling,
        R_i=inradius(w_a, c.s_l, c.f_l),
        feasible=violation is None,
        violation=violation,
    )


def max_feasible_n(c: DesignConstraints = DEFAULT_CONSTRAINTS) -> int:
    """Largest ``n >= n_min`` whose spacing still meets ``s_p_min``.

    spacing(n) < a_l / n, so no n above a_l / s_p_min can qualify and the scan
    below is exhaustive.
    """
    lo = max(int(c.n_min), 3)
    hi = int(math.floor(c.a_l / c.s_p_min)) + 1
    best = None
    for n in range(lo, hi + 1):
        if spacing(n, c.a_l) >= c.s_p_min:
            best = n
    if best is None:
        raise GeometryError("constraint set infeasible")
    return best
