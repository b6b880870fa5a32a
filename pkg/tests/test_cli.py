from __future__ import annotations

import json

import pytest

from haltflow.cli import main
from haltflow.export import read_trajectory

from test_machine import many_states


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_compactified(capsys):
    code, out, _ = run_cli(capsys, "run", "--machine", "halt3.tm", "--tape", "[0]", "--mode", "compactified",
                           "--horizon", "5")
    assert code == 0
    rep = json.loads(out)
    assert rep["outcome"] == "PlateauHit"
    assert rep["tau_detect"] == pytest.approx(2.94, abs=0.01)


def test_run_loop_ambient(capsys):
    code, out, _ = run_cli(capsys, "run", "--machine", "loop.tm", "--mode", "ambient", "--horizon", "5")
    rep = json.loads(out)
    assert code == 0 and rep["outcome"] == "Bounded"
    assert rep["sup_norm"] == pytest.approx(2.2361, abs=1e-4)


def test_missing_machine(capsys):
    code, _, err = run_cli(capsys, "run", "--machine", "no/such.tm")
    assert code == 2
    assert "file not found" in err


def test_bad_tape_and_threshold(capsys):
    assert run_cli(capsys, "run", "--machine", "halt3.tm", "--tape", "[7]")[0] == 2
    assert run_cli(capsys, "run", "--machine", "halt3.tm", "--threshold", "1")[0] == 2


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.tm"
    bad.write_text("alphabet: 2\nstates: START,HALT\nSTART 0 -> HALT 5 N\n")
    code, _, err = run_cli(capsys, "predict", "--machine", str(bad))
    assert code == 2 and "line 3" in err


def test_predict(capsys):
    code, out, _ = run_cli(capsys, "predict", "--machine", "halt3.tm", "--tape", "[0]")
    assert code == 0 and out.startswith("2.95 ")
    code, out, _ = run_cli(capsys, "predict", "--machine", "loop.tm", "--budget", "1000")
    assert code == 0 and "no halt within budget" in out


def test_check_passes(capsys):
    code, out, _ = run_cli(capsys, "check", "--machine", "halt3.tm")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 4 and all(l.startswith("[PASS]") for l in lines)


def test_check_corrupted_margins(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "layout", "--machine", "halt3.tm")
    data = json.loads(out)
    data["margin"] = "1/5"
    path = tmp_path / "layout.json"
    path.write_text(json.dumps(data))
    code, out, _ = run_cli(capsys, "check", "--machine", "halt3.tm", "--layout", str(path))
    assert code == 3
    assert out.startswith("[FAIL] layout") and "overlap" in out


def test_recipe_overflow(tmp_path, capsys):
    from haltflow.tm import format_tm
    path = tmp_path / "big.tm"
    path.write_text(format_tm(many_states(17)))
    code, _, err = run_cli(capsys, "check", "--machine", str(path))
    assert code == 3 and "overflow" in err


def test_export_roundtrip(tmp_path, capsys):
    for fmt in ("csv", "jsonl"):
        path = tmp_path / f"traj.{fmt}"
        code, out, _ = run_cli(capsys, "export", "--machine", "one-step.tm", "--mode", "ambient",
                               "--horizon", "0.5", "--export", str(path), "--format", fmt, "--stride", "10")
        assert code == 0
        cols, rows = read_trajectory(path)
        assert cols == ["tau"] + [f"x{i}" for i in range(1, 12)] + ["h", "norm"]
        assert rows[0][0] == 0.0 and rows[-1][0] == pytest.approx(0.5)
    a = read_trajectory(tmp_path / "traj.csv")
    b = read_trajectory(tmp_path / "traj.jsonl")
    assert a == b


def test_export_needs_path(capsys):
    assert run_cli(capsys, "export", "--machine", "one-step.tm")[0] == 2


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# experiment\nmachine = one-step.tm\nmode = intrinsic\nhorizon = 0.5\n")
    code, out, _ = run_cli(capsys, "run", "--config", str(cfg))
    rep = json.loads(out)
    assert code == 0 and rep["mode"] == "intrinsic" and rep["horizon"] == 0.5
    code, out, _ = run_cli(capsys, "run", "--config", str(cfg), "--horizon", "0.25")
    assert json.loads(out)["horizon"] == 0.25
    cfg.write_text("colour = blue\n")
    assert run_cli(capsys, "run", "--config", str(cfg), "--machine", "one-step.tm")[0] == 2


def test_output_is_byte_identical(capsys):
    argv = ("run", "--machine", "one-step.tm", "--mode", "intrinsic", "--horizon", "1.5", "--seed", "3")
    first = run_cli(capsys, *argv)
    second = run_cli(capsys, *argv)
    assert first == second


def test_jobs_fan_out(capsys):
    argv = ["run", "--machine", "halt3.tm", "--mode", "intrinsic", "--horizon", "1",
            "--tape", "[0]", "--tape", "[1]", "--tape", "1[0]"]
    serial = run_cli(capsys, *argv)
    parallel = run_cli(capsys, *argv, "--jobs", "3")
    assert serial == parallel
    assert len(serial[1].strip().splitlines()) == 3
