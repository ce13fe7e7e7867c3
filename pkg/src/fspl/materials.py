"""TPU-coated nylon fabric database and criterion-based material selection.

The bundled CSV holds the measured density, heat-seal peel strength and
burst pressure of seven heat-sealable fabrics. Elastic constants used by the
simulation layer live alongside the records as a small named map.
"""

from __future__ import annotations

import csv
import functools
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, TextIO

CSV_HEADER = ("name", "density_kg_m3", "seal_strength_n", "burst_mean_mpa", "burst_std_mpa")

CRITERIA = ("max_burst", "max_seal", "min_density")


class MaterialError(ValueError):
    """Raised for malformed or inconsistent material data."""


class MaterialParseError(MaterialError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class MaterialRecord:
    name: str
    density: float  # kg/m^3
    seal_strength: float  # N
    burst_mean: float  # MPa
    burst_std: float  # MPa

    def __post_init__(self):
        if not self.name:
            raise MaterialError("material name must be non-empty")
        for attr in ("density", "seal_strength", "burst_mean"):
            value = getattr(self, attr)
            if not (math.isfinite(value) and value > 0):
                raise MaterialError(f"{self.name}: {attr} must be > 0, got {value}")
        if not (math.isfinite(self.burst_std) and self.burst_std >= 0):
            raise MaterialError(f"{self.name}: burst_std must be >= 0, got {self.burst_std}")


@dataclass(frozen=True)
class ElasticProperties:
    youngs_modulus: float  # MPa
    poisson_ratio: float

    def __post_init__(self):
        if not (math.isfinite(self.youngs_modulus) and self.youngs_modulus > 0):
            raise MaterialError(f"youngs_modulus must be > 0, got {self.youngs_modulus}")
        if not 0 <= self.poisson_ratio < 0.5:
            raise MaterialError(f"poisson_ratio must lie in [0, 0.5), got {self.poisson_ratio}")


# Linear elastic constants of the simulated components (ASTM D882 for the fabric).
DEFAULT_ELASTIC = {
    "actuator_fabric": ElasticProperties(498.0, 0.35),
    "strain_limit_layer": ElasticProperties(305.0, 0.35),
    "connector": ElasticProperties(3600.0, 0.3),
}

ACTUATOR_FABRIC = "Rockywoods 200D"


@dataclass(frozen=True)
class MaterialDB:
    records: tuple[MaterialRecord, ...]
    elastic: dict[str, ElasticProperties] = field(default_factory=lambda: dict(DEFAULT_ELASTIC))

    def __post_init__(self):
        if not self.records:
            raise MaterialError("no records")
        seen = set()
        for rec in self.records:
            if rec.name in seen:
                raise MaterialError(f"duplicate material name {rec.name!r}")
            seen.add(rec.name)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def names(self) -> list[str]:
        return [r.name for r in self.records]

    def get(self, name: str) -> MaterialRecord:
        for rec in self.records:
            if rec.name == name:
                return rec
        raise MaterialError(f"unknown material {name!r}; available: {self.names()}")


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MaterialParseError(line, f"{column}: cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise MaterialParseError(line, f"{column}: non-finite value {text!r}")
    return value


def load_material_db(source: TextIO) -> MaterialDB:
    """Parse a material CSV stream into a :class:`MaterialDB`.

    Records keep file order. Line numbers in errors count the header as line 1.
    """
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise MaterialError("no records") from None
    header = [h.strip() for h in header]
    if tuple(header) != CSV_HEADER:
        raise MaterialParseError(1, f"expected header {','.join(CSV_HEADER)}, got {','.join(header)}")

    records = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_HEADER):
            raise MaterialParseError(line, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
        name = row[0].strip()
        values = [_parse_float(cell.strip(), line, col) for cell, col in zip(row[1:], CSV_HEADER[1:])]
        try:
            records.append(MaterialRecord(name, *values))
        except MaterialError as exc:
            raise MaterialParseError(line, str(exc)) from None
    return MaterialDB(tuple(records))


def load_bundled_db() -> MaterialDB:
    text = resources.files("fspl.data").joinpath("tpu_nylon_fabrics.csv").read_text(encoding="utf-8")
    return load_material_db(io.StringIO(text))


def dump_material_db(db: MaterialDB | Iterable[MaterialRecord]) -> str:
    """Serialize records to the CSV schema. ``repr`` floats keep the round trip exact."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in db:
        writer.writerow([r.name, repr(r.density), repr(r.seal_strength), repr(r.burst_mean), repr(r.burst_std)])
    return buf.getvalue()


def select_material(db: MaterialDB, criterion: str) -> MaterialRecord:
    """Pick the record that best satisfies ``criterion``; earliest row wins ties."""
    if criterion == "max_burst":
        key = lambda r: -r.burst_mean
    elif criterion == "max_seal":
        key = lambda r: -r.seal_strength
    elif criterion == "min_density":
        key = lambda r: r.density
    else:
        raise MaterialError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")
    # min() returns the first minimal element, which gives the file-order tie break.
    return min(db.records, key=key)


def wave_speed(elastic: ElasticProperties, density: float) -> float:
    """Longitudinal stress-wave speed sqrt(E/rho) in m/s (E given in MPa)."""
    if not density > 0:
        raise MaterialError(f"density must be > 0, got {density}")
    return math.sqrt(elastic.youngs_modulus * 1e6 / density)


def actuator_wave_speed(db: MaterialDB | None = None) -> float:
    """Wave speed of the actuator fabric, used to size loading ramps.

    A user database without the actuator fabric falls back to the bundled one.
    """
    if db is None or ACTUATOR_FABRIC not in db.names():
        db = _bundled()
    return wave_speed(db.elastic["actuator_fabric"], db.get(ACTUATOR_FABRIC).density)


@functools.lru_cache(maxsize=1)
def _bundled() -> MaterialDB:
    return load_bundled_db()
