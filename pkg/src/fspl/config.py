"""Run configuration: a flat ``key = value`` text file with ``#`` comments.

Values are numbers or strings (double-quoted, or a bare word without spaces).
Geometry keys are in mm, limb keys in m, pressures in MPa, masses in kg.
Every key is optional; an empty file and no file give the same defaults.

Example::

    # tighter sewing limit
    s_p_min_mm = 15
    material = "Rockywoods 200D"
    seed = 7
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import kinematics as kin
from .geometry import DesignConstraints, GeometryError
from .materials import ACTUATOR_FABRIC, MaterialDB, MaterialError, load_bundled_db, load_material_db


class ConfigError(ValueError):
    pass


_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")

# key -> (type, target). Types: float, int, optional int, str.
_KEYS = {
    "r_c_mm": (float, "R_c"),
    "s_l_mm": (float, "s_l"),
    "f_l_mm": (float, "f_l"),
    "a_l_mm": (float, "a_l"),
    "theta_n_deg": (float, "theta_n"),
    "s_p_min_mm": (float, "s_p_min"),
    "n_min": (int, "n_min"),
    "n_max": (int, "n_max"),
    "p_max_mpa": (float, "P_max"),
    "n_segments": (int, None),
    "segment_length_m": (float, None),
    "segment_theta_max_deg": (float, None),
    "limb_length_m": (float, None),
    "limb_mass_kg": (float, None),
    "material": (str, None),
    "material_db": (str, None),
    "seed": (int, None),
    "samples": (int, None),
    "out_dir": (str, None),
}


@dataclass(frozen=True)
class RunConfig:
    constraints: DesignConstraints = field(default_factory=DesignConstraints)
    n_segments: int = 3
    segment_length_m: float = kin.SEGMENT_LENGTH
    segment_theta_max_deg: float = 180.0
    limb_length_m: float = kin.LIMB_LENGTH
    limb_mass_kg: float = kin.LIMB_MASS
    material: str = ACTUATOR_FABRIC
    material_db: Optional[str] = None
    seed: int = 42
    samples: int = 100_000
    out_dir: Optional[str] = None
    source: Optional[str] = None

    def load_db(self) -> MaterialDB:
        if self.material_db is None:
            return load_bundled_db()
        with open(self.material_db, encoding="utf-8", newline="") as fh:
            return load_material_db(fh)

    def limb(self, base_frame: Optional[kin.Pose] = None) -> kin.LimbSpec:
        seg = kin.SegmentSpec(arc_length=self.segment_length_m, theta_max=self.segment_theta_max_deg,
                              p_max=self.constraints.P_max)
        return kin.default_limb(base_frame, seg, self.n_segments, self.limb_length_m, self.limb_mass_kg)

    def echo(self) -> dict:
        c = self.constraints
        return {
            "r_c_mm": c.R_c, "s_l_mm": c.s_l, "f_l_mm": c.f_l, "a_l_mm": c.a_l,
            "theta_n_deg": c.theta_n, "s_p_min_mm": c.s_p_min, "n_min": c.n_min,
            "n_max": c.n_max, "p_max_mpa": c.P_max, "n_segments": self.n_segments,
            "segment_length_m": self.segment_length_m,
            "segment_theta_max_deg": self.segment_theta_max_deg,
            "limb_length_m": self.limb_length_m, "limb_mass_kg": self.limb_mass_kg,
            "material": self.material, "material_db": self.material_db,
            "seed": self.seed, "samples": self.samples,
        }


def _parse_value(raw: str, kind, key: str, lineno: int):
    if raw.startswith('"'):
        if len(raw) < 2 or not raw.endswith('"'):
            raise ConfigError(f"line {lineno}: unterminated string for {key}")
        text, quoted = raw[1:-1], True
    else:
        text, quoted = raw, False
    if kind is str:
        if not quoted and (not text or " " in text):
            raise ConfigError(f"line {lineno}: {key} needs a string value (quote it if it has spaces)")
        return text
    if quoted:
        raise ConfigError(f"line {lineno}: {key} expects a number, got string {raw}")
    try:
        if kind is int:
            return int(text)
        value = float(text)
    except ValueError:
        kind_name = "an integer" if kind is int else "a number"
        raise ConfigError(f"line {lineno}: {key} expects {kind_name}, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"line {lineno}: {key} must be finite")
    return value


def parse_config_text(text: str, source: Optional[str] = None) -> RunConfig:
    values: dict = {}
    lines: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(line).strip()
        if not stripped:
            continue
        m = _LINE.match(stripped)
        if not m:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, raw = m.group(1), m.group(2)
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(raw, _KEYS[key][0], key, lineno)
        lines[key] = lineno
    return _build(values, lines, source)


def _strip_comment(line: str) -> str:
    # '#' starts a comment unless it sits inside a quoted string.
    inside = False
    for i, ch in enumerate(line):
        if ch == '"':
            inside = not inside
        elif ch == "#" and not inside:
            return line[:i]
    return line


def _build(values: dict, lines: dict, source: Optional[str]) -> RunConfig:
    cons = {target: values[k] for k, (_, target) in _KEYS.items() if target and k in values}
    try:
        constraints = DesignConstraints(**cons)
    except GeometryError as exc:
        raise ConfigError(f"invalid constraints: {exc}") from None
    rest = {k: values[k] for k, (_, target) in _KEYS.items() if target is None and k in values}
    cfg = RunConfig(constraints=constraints, source=source, **rest)
    for key in ("seed", "n_segments"):
        if getattr(cfg, key) < (0 if key == "seed" else 1):
            raise ConfigError(f"line {lines.get(key, '?')}: {key} out of range")
    if cfg.samples < 1:
        raise ConfigError(f"line {lines.get('samples', '?')}: samples must be >= 1")
    try:
        cfg.limb()
    except kin.KinematicsError as exc:
        raise ConfigError(f"invalid limb: {exc}") from None
    try:
        db = cfg.load_db()
        db.get(cfg.material)
    except (OSError, MaterialError) as exc:
        raise ConfigError(f"material: {exc}") from None
    return cfg


def parse_config(path: Optional[str | Path] = None) -> RunConfig:
    """Load ``path`` or, when it is None, return the all-default configuration."""
    if path is None:
        return _build({}, {}, None)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))
