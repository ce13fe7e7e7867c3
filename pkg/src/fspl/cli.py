"""Command-line entry point: ``fspl <command> [options]``.

Every command prints a JSON report (inputs, outputs, version, timestamp) to
stdout. With ``--out DIR`` it also writes ``<command>.json`` (same report
without the timestamp) and, for ``--format csv``, the command's tables.

Exit status: 0 on success, 1 on domain errors, 2 on usage errors (bad
flags, unreadable or malformed config and input files).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from . import __version__
from . import kinematics as kin
from . import mechanics as mech
from . import quasistatics as qs
from .config import ConfigError, RunConfig, parse_config
from .geometry import GeometryError, max_feasible_n, solve_design
from .materials import CRITERIA, MaterialError, dump_material_db, select_material


class UsageError(Exception):
    pass


DOMAIN_ERRORS = (MaterialError, GeometryError, mech.MechanicsError, kin.KinematicsError,
                 qs.QuasiStaticError)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


def _pressure_list(text: str) -> tuple[float, ...]:
    return tuple(_finite(p) for p in text.split(","))


# -- geometry payloads -------------------------------------------------------

def _geometry_dict(g) -> dict:
    return {
        "n": g.n, "r": g.r, "s_p_mm": g.s_p, "h_a_mm": g.h_a, "w_a_mm": g.w_a,
        "w_a_ceiling_mm": g.w_a_ceiling, "R_i_mm": g.R_i, "feasible": g.feasible,
        "violation": g.violation,
    }


def _csv(header: list[str], rows) -> str:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, float):
            return repr(v)
        return str(v)
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


# -- commands ----------------------------------------------------------------
# Each returns (inputs, outputs, csv_files).

def cmd_materials(args, cfg: RunConfig):
    db = cfg.load_db()
    if args.action == "list":
        rec_rows = list(db)
        outputs = {"materials": [_record_dict(r) for r in rec_rows]}
        return {"action": "list"}, outputs, {"materials.csv": dump_material_db(db)}
    rec = select_material(db, args.criterion)
    return ({"action": "select", "criterion": args.criterion},
            {"selected": _record_dict(rec)}, {"materials_select.csv": dump_material_db([rec])})


def _record_dict(r) -> dict:
    return {"name": r.name, "density_kg_m3": r.density, "seal_strength_n": r.seal_strength,
            "burst_mean_mpa": r.burst_mean, "burst_std_mpa": r.burst_std}


def cmd_design(args, cfg: RunConfig):
    c = cfg.constraints
    geom = solve_design(args.n, args.r, c)
    out = _geometry_dict(geom)
    out["max_feasible_n"] = max_feasible_n(c)
    header = ["n", "r", "s_p_mm", "h_a_mm", "w_a_mm", "w_a_ceiling_mm", "R_i_mm", "feasible", "violation"]
    row = [out[k] for k in header]
    return {"action": "solve", "n": args.n, "r": args.r}, out, {"design.csv": _csv(header, [row])}


def cmd_sweep(args, cfg: RunConfig):
    grid = mech.ratio_grid(args.r_min, args.r_max, args.r_step)
    result = mech.sweep_designs(cfg.constraints, grid)
    best = {"best_n": result.best[0], "best_r": result.best[1]}
    outputs = dict(best)
    outputs["rows"] = len(result.rows)
    outputs["feasible_rows"] = sum(r.feasible for r in result.rows)
    files = {"sweep.csv": mech.sweep_rows_csv(result),
             "sweep_best.json": json.dumps(best, sort_keys=True) + "\n"}
    return {"r_min": args.r_min, "r_max": args.r_max, "r_step": args.r_step, "r_grid": grid}, outputs, files


def _read_pressures(path: str) -> list[list[float]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read pressures file {path}: {exc.strerror}") from None
    stripped = text.strip()
    if stripped.startswith("{") or stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
        if isinstance(data, dict):
            data = data.get("pressures")
        if not isinstance(data, list):
            raise UsageError(f"{path}: expected a list of pressure triples")
        try:
            return [[float(p) for p in trip] for trip in data]
        except (TypeError, ValueError):
            raise UsageError(f"{path}: pressures must be numbers") from None
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").split() if p]
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise UsageError(f"{path}: line {lineno}: pressures must be numbers") from None
    return rows


def cmd_pose(args, cfg: RunConfig):
    rows = _read_pressures(args.pressures)
    limb = cfg.limb()
    cmd = kin.PressureCommand(tuple(tuple(r) for r in rows))
    tip, backbone = kin.forward_kinematics(limb, cmd, args.points_per_segment)
    arcs = [kin.segment_arc(p, s) for p, s in zip(cmd.pressures, limb.segments)]
    outputs = {
        "tip_position_m": tip.translation.tolist(),
        "tip_rotation": tip.rotation.tolist(),
        "segments": [{"kappa_per_m": a.kappa, "psi_rad": a.psi, "bend_deg": math.degrees(a.theta)}
                     for a in arcs],
        "backbone_points": len(backbone),
    }
    return ({"pressures_mpa": [list(p) for p in cmd.pressures],
             "points_per_segment": args.points_per_segment},
            outputs, {"pose_backbone.csv": kin.points_csv(backbone)})


def cmd_workspace(args, cfg: RunConfig):
    samples = args.samples if args.samples is not None else cfg.samples
    seed = args.seed if args.seed is not None else cfg.seed
    limb = cfg.limb(kin.WORKSPACE_MOUNT)
    report, points = kin.workspace_report(limb, samples, seed, workers=args.workers)
    straight, _ = kin.forward_kinematics(limb, kin.PressureCommand.zeros(len(limb.segments)))
    outputs = report.to_dict()
    outputs["straight_reach_m"] = float(math.dist(straight.translation, limb.base_frame.translation))
    return {"samples": samples, "seed": seed}, outputs, {"workspace_points.csv": kin.points_csv(points)}


def _chain_pressure(component: str, given: Optional[tuple[float, ...]]) -> tuple[float, ...]:
    if given is not None:
        return given
    return qs.FSPL_PAYLOAD_PRESSURES if component == "fspl" else (mech.CALIBRATION_PRESSURE,)


def cmd_quasistatic(args, cfg: RunConfig):
    chain = qs.build_chain(args.component, tip_mass=args.tip_mass, theta_n=cfg.constraints.theta_n)
    pressure = _chain_pressure(args.component, args.pressure)
    outcome = qs.lift_test(chain, pressure, horizontal_tolerance=args.tolerance,
                           ramp_duration=args.ramp_duration)
    outputs = outcome.lift.to_dict()
    outputs["lifted"] = outcome.success
    outputs["drape_converged"] = outcome.drape.converged
    outputs["min_ramp_duration_s"] = qs.min_ramp_duration(chain.length, chain.wave_speed)
    inputs = {"component": args.component, "pressure_mpa": list(pressure), "tip_mass_kg": args.tip_mass,
              "ramp_duration_s": args.ramp_duration, "tolerance_m": args.tolerance}
    return inputs, outputs, {"quasistatic_trace.csv": outcome.lift.trace_csv()}


_MEASURED_PAYLOAD = {"f3ba": mech.F3BA_FREE_PAYLOAD, "fspl": mech.FSPL_FREE_PAYLOAD}


def cmd_payload(args, cfg: RunConfig):
    pressure = _chain_pressure(args.component, args.pressure)
    search = qs.payload_search(args.component, pressure, horizontal_tolerance=args.tolerance,
                               chain_kwargs={"theta_n": cfg.constraints.theta_n})
    model = mech.f3ba_moment_model()
    chain = qs.build_chain(args.component, theta_n=cfg.constraints.theta_n)
    # The straight-arm oracle uses the base pressure (first channel).
    oracle = mech.static_payload_estimate(model, pressure[0], chain.length, chain.mass) if pressure[0] > 0 else 0.0
    outputs = {
        "max_mass_kg": search.mass,
        "oracle_mass_kg": oracle,
        "measured_mass_kg": _MEASURED_PAYLOAD.get(args.component),
        "probes": [[m, ok] for m, ok in search.probes],
    }
    inputs = {"component": args.component, "pressure_mpa": list(pressure), "tolerance_m": args.tolerance}
    return inputs, outputs, {"payload_probes.csv": _csv(["mass_kg", "success"], search.probes)}


COMMANDS: dict[str, Callable] = {
    "materials": cmd_materials,
    "design": cmd_design,
    "sweep": cmd_sweep,
    "pose": cmd_pose,
    "workspace": cmd_workspace,
    "quasistatic": cmd_quasistatic,
    "payload": cmd_payload,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="directory for result files")
    common.add_argument("--format", choices=("csv", "json"), default="json",
                        help="json writes <command>.json; csv also writes the tables")

    p = _Parser(prog="fspl", description="Fabric soft limb design and analysis toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("materials", help="material database queries")
    msub = m.add_subparsers(dest="action", required=True, parser_class=_Parser)
    sel = msub.add_parser("select", parents=[common], help="pick a fabric by criterion")
    sel.add_argument("--criterion", choices=CRITERIA, default="max_burst")
    msub.add_parser("list", parents=[common], help="list the database")

    d = sub.add_parser("design", help="array geometry")
    dsub = d.add_subparsers(dest="action", required=True, parser_class=_Parser)
    solve = dsub.add_parser("solve", parents=[common], help="solve one (n, r) design")
    solve.add_argument("--n", type=int, required=True)
    solve.add_argument("--r", type=_finite, required=True)

    s = sub.add_parser("sweep", parents=[common], help="sweep (n, r) and pick the best design")
    s.add_argument("--r-min", type=_finite, default=1.0)
    s.add_argument("--r-max", type=_finite, default=3.5)
    s.add_argument("--r-step", type=_finite, default=0.5)

    po = sub.add_parser("pose", parents=[common], help="forward kinematics for one command")
    po.add_argument("--pressures", required=True,
                    help="file with one 'p1 p2 p3' line per segment (MPa), or JSON")
    po.add_argument("--points-per-segment", type=_positive_int, default=20)

    w = sub.add_parser("workspace", parents=[common], help="sample the reachable workspace")
    w.add_argument("--samples", type=_positive_int)
    w.add_argument("--seed", type=_nonneg_int)
    w.add_argument("--workers", type=_positive_int, default=None)

    for name, helptext in (("quasistatic", "settle one loaded lift"), ("payload", "bisect for max tip mass")):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("--component", choices=qs.COMPONENTS, default="f3ba")
        q.add_argument("--pressure", type=_pressure_list, default=None,
                       help="MPa, one value or one per segment (comma separated)")
        q.add_argument("--tolerance", type=_finite, default=0.01, help="m below the base still counted as lifted")
        if name == "quasistatic":
            q.add_argument("--tip-mass", type=_finite, default=0.0)
            q.add_argument("--ramp-duration", type=_finite, default=None)
    return p


def _write_outputs(out_dir: str, command: str, report: dict, csv_files: dict, fmt: str):
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        stable = {k: v for k, v in report.items() if k != "timestamp"}
        (path / f"{command}.json").write_text(json.dumps(stable, indent=2, sort_keys=True) + "\n",
                                              encoding="utf-8")
        if fmt == "csv":
            for name, text in csv_files.items():
                (path / name).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write to {out_dir}: {exc.strerror}") from None


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = parse_config(args.config)
        inputs, outputs, csv_files = COMMANDS[args.command](args, cfg)
        report = {
            "command": args.command,
            "inputs": {"config": cfg.echo(), "config_file": cfg.source, **inputs},
            "outputs": outputs,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        out_dir = args.out or cfg.out_dir
        if out_dir:
            _write_outputs(out_dir, args.command, report, csv_files, args.format)
    except (ConfigError, UsageError) as exc:
        print(f"fspl: error: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"fspl: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
