import json

import pytest

from fspl.cli import main

PRESSURES = "0.345 0 0\n0 0.1 0\n0 0 0\n"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_design_solve(capsys):
    r = report(capsys, "design", "solve", "--n", "19", "--r", "2.0")
    o = r["outputs"]
    assert o["feasible"] and o["max_feasible_n"] == 19
    assert o["s_p_mm"] == pytest.approx(7.535, abs=0.001)
    assert set(r) == {"command", "inputs", "outputs", "version", "timestamp"}


def test_design_infeasible_reports_violation(capsys):
    o = report(capsys, "design", "solve", "--n", "20", "--r", "2.0")["outputs"]
    assert not o["feasible"] and o["violation"].startswith("s_p < s_p_min")


def test_materials_and_sweep(capsys):
    sel = report(capsys, "materials", "select", "--criterion", "max_burst")["outputs"]["selected"]
    assert sel["name"] == "Rockywoods 200D" and sel["burst_mean_mpa"] == 0.53
    assert len(report(capsys, "materials", "list")["outputs"]["materials"]) >= 2
    o = report(capsys, "sweep")["outputs"]
    assert (o["best_n"], o["best_r"]) == (19, 2.0)


def test_pose(capsys, tmp_path):
    f = tmp_path / "p.txt"
    f.write_text(PRESSURES)
    o = report(capsys, "pose", "--pressures", str(f))["outputs"]
    assert o["segments"][0]["bend_deg"] == pytest.approx(180.0)
    f.write_text(json.dumps({"pressures": [[0, 0, 0]] * 3}))
    o = report(capsys, "pose", "--pressures", str(f))["outputs"]
    assert o["tip_position_m"] == pytest.approx([0, 0, 0.59], abs=1e-12)


def test_config_applies(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("s_p_min_mm = 15\n")
    o = report(capsys, "design", "solve", "--n", "8", "--r", "2.0", "--config", str(cfg))["outputs"]
    assert o["max_feasible_n"] == 8


@pytest.mark.parametrize("argv, code", [
    (["workspace", "--samples", "0"], 2),
    (["design", "solve", "--n", "19"], 2),
    (["frobnicate"], 2),
    (["design", "solve", "--n", "2", "--r", "2.0"], 1),
    (["quasistatic", "--pressure", "0.5"], 1),
    (["pose", "--pressures", "/no/such/file"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_bad_config_exits_2(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("r_c_mm = \"fifty\"\n")
    code, _, err = run(capsys, "sweep", "--config", str(cfg))
    assert code == 2 and "line 1" in err


def test_csv_outputs(capsys, tmp_path):
    report(capsys, "sweep", "--out", str(tmp_path), "--format", "csv")
    assert {p.name for p in tmp_path.iterdir()} == {"sweep.json", "sweep.csv", "sweep_best.json"}
    assert json.loads((tmp_path / "sweep_best.json").read_text()) == {"best_n": 19, "best_r": 2.0}
    assert "timestamp" not in json.loads((tmp_path / "sweep.json").read_text())


COMMANDS = [
    ["materials", "select", "--criterion", "max_burst"],
    ["design", "solve", "--n", "19", "--r", "2.0"],
    ["sweep", "--r-min", "1.0", "--r-max", "3.5", "--r-step", "0.5"],
    ["pose", "--pressures", "{pressures}"],
    ["workspace", "--samples", "20000", "--seed", "42"],
    ["quasistatic", "--component", "f3ba", "--pressure", "0.345", "--tip-mass", "5.0"],
    ["payload", "--component", "f3ba"],
]


def run_all(capsys, root, pressures):
    files = {}
    for i, argv in enumerate(COMMANDS):
        out = root / str(i)
        argv = [a.format(pressures=pressures) for a in argv]
        report(capsys, *argv, "--out", str(out), "--format", "csv")
        for p in sorted(out.iterdir()):
            files[f"{i}/{p.name}"] = p.read_bytes()
    return files


def test_byte_identical_reruns(capsys, tmp_path):
    f = tmp_path / "p.txt"
    f.write_text(PRESSURES)
    a = run_all(capsys, tmp_path / "a", f)
    b = run_all(capsys, tmp_path / "b", f)
    assert a.keys() == b.keys() and len(a) >= 2 * len(COMMANDS)
    assert a == b
