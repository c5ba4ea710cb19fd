import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from regretctl import cli, io
from regretctl.evaluation import regret_norm
from regretctl.io import shipped_plant_path
from regretctl.sysmodel import absorb_weights

SCALAR = str(shipped_plant_path("scalar"))


def run(*args):
    return cli.main([str(a) for a in args])


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_synthesize_happy_path(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert run("synthesize", "--plant", SCALAR, "--out", out) == 0
    d = json.loads(out.read_text())
    assert {"A", "B", "C", "D", "kind", "gamma"} <= set(d)
    assert d["diagnostics"]["gamma_squared"] == pytest.approx(0.7826, rel=1e-3)
    assert "optimal regret" in capsys.readouterr().out


def test_synthesize_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run("synthesize", "--plant", SCALAR, "--kind", "ro-sc", "--out", path) == 0
    assert a.read_bytes() == b.read_bytes()


def test_assumption_violation_exit_code(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"F": [[1.0]], "G1": [[0.0]], "G2": [[1.0]], "H": [[1.0]], "L": [[1.0]]}))
    assert run("synthesize", "--plant", path) == 2
    assert "unit_circle_controllable_FG1" in capsys.readouterr().err


def test_corrupt_json_exit_code(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text('{"F": [[1')
    assert run("synthesize", "--plant", path) == 1
    assert "line 1, column" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ("--plant", "/nonexistent.json"),
    ("--plant", SCALAR, "--grid", "100"),
    ("--plant", SCALAR, "--gamma-tol", "0.5"),
    ("--plant", SCALAR, "--horizon", "0"),
])
def test_bad_configuration_exit_code(args):
    assert run("synthesize", *args) == 1


def test_argument_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        run("synthesize", "--bogus")
    assert exc.value.code == 1


def test_compare_scalar(tmp_path):
    out = tmp_path / "t.csv"
    assert run("compare", "--plant", SCALAR, "--out", out) == 0
    rows = {r["controller"]: r for r in _rows(out)}
    assert list(rows) == ["NC", "RO", "H2", "Hinf"]
    assert all(len(r) == 4 for r in rows.values())
    causal = ("RO", "H2", "Hinf")
    assert min(causal, key=lambda k: float(rows[k]["regret"])) == "RO"


def test_compare_grid_convergence(tmp_path):
    coarse, fine = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("compare", "--plant", SCALAR, "--grid", 256, "--out", coarse) == 0
    assert run("compare", "--plant", SCALAR, "--grid", 1024, "--out", fine) == 0
    for a, b in zip(_rows(coarse), _rows(fine)):
        assert abs(float(a["frobenius_sq"]) - float(b["frobenius_sq"])) < 1e-8


def test_compare_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run("compare", "--plant", SCALAR, "--grid", 256, "--out", path) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rows_and_consistency(tmp_path):
    out = tmp_path / "s.csv"
    assert run("sweep", "--plant", SCALAR, "--out", out) == 0
    rows = _rows(out)
    assert len(rows) == 1024
    assert list(rows[0]) == list(io.SWEEP_COLUMNS)
    plant = absorb_weights(io.load_plant(SCALAR))
    from regretctl.synthesis import optimal_gamma

    reg = regret_norm(plant, optimal_gamma(plant).controller, 1024)
    peak = max(float(r["regret_eig"]) for r in rows)
    assert peak <= reg * (1 + 1e-12)
    assert peak == pytest.approx(reg, rel=1e-4)


def test_sweep_h2_peak_exceeds_hinf_peak(tmp_path):
    peaks = {}
    for kind in ("h2", "hinf"):
        out = tmp_path / f"{kind}.csv"
        assert run("sweep", "--plant", SCALAR, "--kind", kind, "--out", out) == 0
        peaks[kind] = max(float(r["sigma_max_sq"]) for r in _rows(out))
    assert peaks["h2"] >= peaks["hinf"]


def test_oracle_scalar(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert run("oracle", "--plant", SCALAR, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["horizons"] == [20, 40, 60]
    assert all(r <= 1.05 for r in rep["ratio_to_gamma_squared"])
    assert rep["monotone"]
    assert "bound PASS" in capsys.readouterr().out


def test_oracle_with_corrupted_controller(tmp_path, capsys):
    ctrl = tmp_path / "c.json"
    assert run("synthesize", "--plant", SCALAR, "--out", ctrl) == 0
    d = json.loads(ctrl.read_text())
    d["A"][0][0] = 1.5
    ctrl.write_text(json.dumps(d))
    assert run("oracle", "--plant", SCALAR, "--controller", ctrl) == 3
    assert "unstable" in capsys.readouterr().err


def test_oracle_budget_exit_code():
    assert run("oracle", "--plant", SCALAR, "--horizon", 3000) == 4


def test_weighted_plant_controller_in_physical_units(tmp_path):
    d = json.loads(open(SCALAR).read())
    d["R"] = [[4.0]]
    plant_path = tmp_path / "w.json"
    plant_path.write_text(json.dumps(d))
    ctrl = tmp_path / "c.json"
    assert run("synthesize", "--plant", plant_path, "--out", ctrl) == 0
    saved = json.loads(ctrl.read_text())
    assert saved["diagnostics"]["input_scaling"] == [[0.5]]
    report = tmp_path / "o.json"
    # the finite-horizon bound itself may fail here, so only the values are compared
    assert run("oracle", "--plant", plant_path, "--controller", ctrl, "--out", report) in (0, 3)
    plant = absorb_weights(io.load_plant(plant_path))
    from regretctl.oracle import finite_horizon_regret
    from regretctl.synthesis import optimal_gamma

    direct = finite_horizon_regret(plant, optimal_gamma(plant).controller, 60).regret
    assert json.loads(report.read_text())["regret"][-1] == pytest.approx(direct, rel=1e-10)


def test_module_entry_point(tmp_path):
    out = tmp_path / "c.json"
    proc = subprocess.run([sys.executable, "-m", "regretctl", "synthesize", "--plant", SCALAR,
                           "--kind", "h2", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert np.asarray(json.loads(out.read_text())["A"]).shape == (1, 1)
    proc = subprocess.run([sys.executable, "-m", "regretctl", "synthesize"], capture_output=True, text=True)
    assert proc.returncode == 1
