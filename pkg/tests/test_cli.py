import json
import subprocess
import sys

import numpy as np
import pytest

from orthoglide.cli import main
from orthoglide.fileio import (
    dump_kv,
    load_kv,
    load_machine,
    load_stiffness,
    read_csv,
    read_json,
    save_stiffness,
)
from orthoglide.stiffness import DEFAULT_STIFFNESS
from orthoglide.synthesis import SynthesisReport


@pytest.fixture(scope="module")
def machine_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("machine")
    assert main(["synthesize", "--cube", "200", "--psi-lo", "0.5", "--psi-hi", "2", "--out", str(out)]) == 0
    return out


def _err(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_synthesize_outputs(machine_dir, params):
    rep = SynthesisReport.from_dict(read_json(machine_dir / "synthesis.json"))
    assert rep.leg_length == pytest.approx(310.0, rel=5e-3)
    assert rep.stroke == pytest.approx(257.0, rel=5e-3)
    assert load_machine(machine_dir / "machine.txt") == params


def test_synthesize_degenerate(tmp_path, capsys):
    assert main(["synthesize", "--psi-lo", "1", "--psi-hi", "1", "--out", str(tmp_path)]) == 2
    err = _err(capsys)
    assert "degenerate bounds" in err["error"] and err["exit_code"] == 2


def test_synthesize_scales(tmp_path, machine_dir):
    assert main(["synthesize", "--cube", "400", "--out", str(tmp_path)]) == 0
    a = read_json(machine_dir / "synthesis.json")
    b = read_json(tmp_path / "synthesis.json")
    for key in ("leg_length", "stroke", "u_q1", "u_q2"):
        assert b[key] == pytest.approx(2 * a[key], rel=1e-12)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ORTHOGLIDE_OUT", str(tmp_path / "env"))
    assert main(["synthesize"]) == 0
    assert (tmp_path / "env" / "synthesis.json").exists()


def test_workspace_check_cube(machine_dir, tmp_path):
    args = ["workspace", "--machine", str(machine_dir / "machine.txt"), "--out", str(tmp_path)]
    assert main(args + ["--check-cube", "--interval", "--resolution", "5"]) == 0
    grid = read_csv(tmp_path / "workspace_grid.csv")
    assert len(grid["x"]) == 125 and grid["feasible"].all()
    boxes = read_json(tmp_path / "workspace_boxes.json")
    assert {b["verdict"] for b in boxes} <= {"Inside", "Boundary"}
    assert read_json(tmp_path / "inclusion.json")["included"] is True


def test_workspace_inflated_cube_fails(machine_dir, tmp_path, capsys):
    args = ["workspace", "--machine", str(machine_dir / "machine.txt"), "--out", str(tmp_path)]
    assert main(args + ["--check-cube", "--inflate", "1.5", "--resolution", "3"]) == 3
    assert _err(capsys)["exit_code"] == 3


def test_workspace_resolution_two(machine_dir, tmp_path):
    main(["workspace", "--machine", str(machine_dir / "machine.txt"), "--resolution", "2", "--out", str(tmp_path)])
    lines = (tmp_path / "workspace_grid.csv").read_text().splitlines()
    assert len(lines) == 1 + 8
    assert lines[0] == "x,y,z,psi_min,psi_max,reachable,within_limits,feasible"


def test_stiffness_isotropic(machine_dir, tmp_path):
    m = str(machine_dir / "machine.txt")
    assert main(["stiffness", "--machine", m, "--at", "isotropic", "--scan", "3", "--out", str(tmp_path)]) == 0
    K = np.array(read_json(tmp_path / "stiffness.json")["K"])
    off = K - np.diag(np.diag(K))
    assert np.abs(off).max() < 1e-6 * np.diag(K).min()
    field = read_csv(tmp_path / "stiffness_field.csv")
    assert len(field["k_xx"]) == 27


def test_stiffness_named_points_from_report(machine_dir, tmp_path):
    m = str(machine_dir / "machine.txt")
    rep = str(machine_dir / "synthesis.json")
    assert main(["stiffness", "--machine", m, "--report", rep, "--at", "Q1", "--out", str(tmp_path)]) == 0
    pos = read_json(tmp_path / "stiffness.json")["position_mm"]
    assert pos == pytest.approx([read_json(rep)["u_q1"]] * 3)


def test_stiffness_with_parameter_file(machine_dir, tmp_path):
    f = tmp_path / "stiff.txt"
    save_stiffness(DEFAULT_STIFFNESS, f)
    m = str(machine_dir / "machine.txt")
    assert main(["stiffness", "--machine", m, "--stiffness", str(f), "--at", "10,20,-30", "--out", str(tmp_path)]) == 0


def test_outside_workspace(machine_dir, tmp_path, capsys):
    m = str(machine_dir / "machine.txt")
    assert main(["deflect", "--machine", m, "--at", "400,0,0", "--out", str(tmp_path)]) == 4
    assert _err(capsys)["exit_code"] == 4
    assert main(["stiffness", "--machine", m, "--at", "180,180,180", "--out", str(tmp_path)]) == 4


def test_singular_structure(machine_dir, tmp_path, capsys):
    f = tmp_path / "weak.txt"
    raw = DEFAULT_STIFFNESS.to_raw()
    raw["k0_override"] = 1e-12
    dump_kv(raw, f)
    m = str(machine_dir / "machine.txt")
    assert main(["deflect", "--machine", m, "--stiffness", str(f), "--out", str(tmp_path)]) == 5
    assert _err(capsys)["exit_code"] == 5


def test_deflect_table_shape(machine_dir, tmp_path):
    m = str(machine_dir / "machine.txt")
    args = ["deflect", "--machine", m, "--at", "isotropic", "--fx", "215", "--fy", "-10", "--fz", "-25", "--hz", "100"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    rows = read_json(tmp_path / "deflection.json")["rows"]
    P, T = rows["P-point"], rows["TCP"]
    assert T["dp_x_mm"] == pytest.approx(P["dp_x_mm"] + 100 * P["dphi_y_rad"], abs=1e-15)
    assert T["dp_y_mm"] == pytest.approx(P["dp_y_mm"] - 100 * P["dphi_x_rad"], abs=1e-15)
    assert T["dp_z_mm"] == P["dp_z_mm"]


def test_sensitivity_zero_samples(machine_dir, tmp_path, capsys):
    m = str(machine_dir / "machine.txt")
    assert main(["sensitivity", "--machine", m, "--at", "Q2", "--samples", "0", "--out", str(tmp_path)]) == 1
    assert _err(capsys)["exit_code"] == 1


def test_sensitivity_outputs(machine_dir, tmp_path):
    m = str(machine_dir / "machine.txt")
    args = ["sensitivity", "--machine", m, "--at", "Q2", "--samples", "2000", "--field", "3", "--out", str(tmp_path)]
    assert main(args) == 0
    res = read_json(tmp_path / "sensitivity.json")
    assert res["samples"] == 2000 and res["seed"] == 0
    assert len(read_csv(tmp_path / "sensitivity_field.csv")["sensitivity_norm"]) == 27


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["stiffness"]) == 1
    assert main(["stiffness", "--machine", "/nonexistent/file.txt"]) == 1


def test_byte_identical_reports(machine_dir, tmp_path):
    m = str(machine_dir / "machine.txt")
    for sub in ("a", "b"):
        out = str(tmp_path / sub)
        main(["synthesize", "--out", out])
        main(["stiffness", "--machine", m, "--at", "Q2", "--out", out])
        main(["deflect", "--machine", m, "--at", "Q1", "--out", out])
        main(["sensitivity", "--machine", m, "--samples", "3000", "--seed", "5", "--out", out])
        main(["workspace", "--machine", m, "--resolution", "4", "--interval", "--depth", "3", "--out", out])
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes(), f.name


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "orthoglide", "synthesize", "--cube", "100", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "leg length 155.29" in proc.stdout


def test_kv_round_trip(tmp_path):
    raw = {"a": 1, "b": 2.5, "c": [1.0, -2.0, 3.25], "d": "x, y, z", "e": "text"}
    dump_kv(raw, tmp_path / "f.txt", header="two\nlines")
    back = load_kv(tmp_path / "f.txt")
    assert back["a"] == 1 and back["b"] == 2.5 and back["c"] == [1.0, -2.0, 3.25]
    assert back["d"] == ["x", "y", "z"] and back["e"] == "text"


def test_kv_rejects_garbage(tmp_path):
    (tmp_path / "bad.txt").write_text("no equals sign here\n")
    with pytest.raises(ValueError, match="bad.txt:1"):
        load_kv(tmp_path / "bad.txt")


def test_shipped_configs_load(params):
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    assert load_machine(root / "machine_default.txt") == params
    assert load_stiffness(root / "stiffness_default.txt") == DEFAULT_STIFFNESS
