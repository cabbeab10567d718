import csv
import io
import json
import math

import pytest

from vortex_area import cli
from vortex_area.functional import f2l


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_baselines_reports_catenoid_when_it_exists(capsys):
    code, out, _ = run(capsys, "baselines", "--l", 0.3, "--no-timing")
    assert code == 0
    rec = json.loads(out)
    assert rec["schema"] == 1 and rec["command"] == "baselines"
    b = rec["outputs"]["baselines"]
    assert b["catenoid_exists"] and b["catenoid_flap"] is not None
    assert b["discs"] == pytest.approx(b["classical"] + math.pi)


def test_baselines_without_catenoid(capsys):
    code, out, _ = run(capsys, "baselines", "--l", 1.0)
    rec = json.loads(out)
    assert code == 0
    assert rec["outputs"]["baselines"]["catenoid_flap"] is None
    assert "wall_time" in rec and "timestamp" in rec


@pytest.mark.parametrize("argv", [
    ["baselines", "--l", "-1"],
    ["baselines", "--l", "nan"],
    ["bound", "--l", "1", "--nx", "16"],
    ["threshold", "--lo", "2", "--hi", "1"],
    ["threshold", "--lo", "0.9", "--hi", "3", "--grid", "9"],
    ["sweep", "--l-list", "0.3,abc"],
    ["recovery", "--k-list", "16,8", "--l", "1"],
    ["recovery", "--k-list", "8"],
    ["recovery", "--k-list", "2", "--l", "1"],
    ["recovery", "--pair", "/nonexistent.json"],
])
def test_invalid_input_exits_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == "" and err.startswith("error:")


@pytest.mark.parametrize("value", ["zero", "0"])
def test_invalid_thread_count_exits_2(capsys, monkeypatch, value):
    monkeypatch.setenv("VORTEX_AREA_THREADS", value)
    code, _, err = run(capsys, "baselines", "--l", 1.0)
    assert code == 2 and "VORTEX_AREA_THREADS" in err


def test_gradcheck_passes(capsys):
    code, out, _ = run(capsys, "gradcheck", "--seed", 7, "--pairs", 5, "--max-n", 11)
    assert code == 0
    assert json.loads(out)["outputs"]["passed"] is True


def test_csv_output(capsys):
    code, out, _ = run(capsys, "baselines", "--l", 0.4, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert float(rows[0]["l"]) == 0.4 and rows[0]["catenoid_exists"] == "True"


def test_no_timing_output_is_deterministic(capsys):
    argv = ("recovery", "--l", 1.0, "--k-list", "8,16", "--no-timing")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    rows = json.loads(first)["outputs"]["rows"]
    assert [r["k"] for r in rows] == [8, 16]


def test_parallel_recovery_matches_serial(capsys, monkeypatch):
    argv = ("recovery", "--l", 1.0, "--k-list", "8", "--no-timing")
    _, serial, _ = run(capsys, *argv)
    monkeypatch.setenv("VORTEX_AREA_THREADS", "4")
    _, parallel, _ = run(capsys, *argv)
    assert serial == parallel


def test_bound_writes_minimizer_that_round_trips(capsys, tmp_path):
    out = tmp_path / "run.json"
    code, text, _ = run(capsys, "bound", "--l", 0.4, "--nx", 17, "--ny", 17, "--out", out, "--no-timing")
    assert code == 0
    assert out.read_text() == text
    rec = json.loads(text)
    path = cli.minimizer_path(out)
    assert rec["outputs"]["minimizer_file"] == str(path)
    res = cli.load_minimizer(path)
    assert f2l(res.h_star, res.psi_star).total == pytest.approx(rec["outputs"]["report"]["f_value"], abs=1e-12)
    code, text, _ = run(capsys, "recovery", "--pair", path, "--k-list", "8", "--no-timing")
    assert code == 0
    assert json.loads(text)["params"]["f_value"] == pytest.approx(res.f_value, abs=1e-12)


def test_tampered_minimizer_is_rejected(capsys, tmp_path):
    out = tmp_path / "run.json"
    run(capsys, "bound", "--l", 0.4, "--nx", 17, "--ny", 17, "--out", out)
    path = cli.minimizer_path(out)
    data = json.loads(path.read_text())
    data["f_value"] += 1e-6
    path.write_text(json.dumps(data))
    code, _, err = run(capsys, "recovery", "--pair", path, "--k-list", "8")
    assert code == 2 and "not reproduced" in err


def test_nonconvergence_exits_3_and_still_writes(capsys, tmp_path):
    out = tmp_path / "rec.json"
    code, text, err = run(capsys, "recovery", "--l", 1.0, "--k-list", "8", "--rel-tol", 1e-15, "--out", out)
    assert code == 3
    assert "not converged" in err
    rec = json.loads(out.read_text())
    assert rec["converged"] is False and text == out.read_text()
