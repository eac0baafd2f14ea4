import csv
import json

import numpy as np
import pytest

from nlscatter import acceptance, cli, linfield

SMALL = {"schema": 1, "L": 4, "grid": {"M": 1024},
         "nonlinearity": {"power": {"c": [1.0, 0.0], "p": 5}},
         "data": {"random": {"seed": 2, "hk_norm": 0.3}}}


def write_cfg(tmp_path, **over):
    cfg = json.loads(json.dumps(SMALL))
    cfg.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, command, name="out", **over):
    out = tmp_path / name
    code = cli.main([command, "--config", write_cfg(tmp_path, **over), "--out", str(out)])
    return code, out


def test_dumps_is_deterministic_and_exact():
    x = 0.1 + 0.2
    text = cli.dumps({"a": x, "b": [1, 2.5, None, True], "c": {"d": np.float64(1 / 3)}})
    data = json.loads(text)
    assert data["a"] == x and data["c"]["d"] == 1 / 3
    assert "0.30000000000000004" in text
    assert json.loads(cli.dumps({"n": float("nan")})) == {"n": None}


def test_linear_command(tmp_path):
    code, out = run(tmp_path, "linear")
    assert code == cli.EXIT_OK
    result = json.loads((out / "result.json").read_text())
    assert result["passed"] and result["roundtrip_error"] < 1e-10
    assert result["free_multiplier_error"] < 1e-10
    rows = list(csv.reader(open(out / "farfield.csv")))
    assert rows[0][:3] == ["ell", "f_re", "f_im"] and len(rows) == 6


def test_linear_oracle_failure_exit(tmp_path, monkeypatch):
    good = linfield.poisson_coefficient
    monkeypatch.setattr(linfield, "poisson_coefficient", lambda *a, **k: 1.1 * good(*a, **k))
    code, _ = run(tmp_path, "linear")
    assert code == cli.EXIT_ORACLE


def test_solve_command_is_reproducible(tmp_path):
    code, out1 = run(tmp_path, "solve", "a")
    code2, out2 = run(tmp_path, "solve", "b")
    assert code == code2 == cli.EXIT_OK
    assert (out1 / "result.json").read_bytes() == (out2 / "result.json").read_bytes()
    result = json.loads((out1 / "result.json").read_text())
    assert result["converged"] and result["report"]["flux_defect"] < 1e-8
    for name in ("iterations.csv", "farfield.csv", "remainder.csv"):
        assert (out1 / name).exists()


def test_seed_override_changes_data(tmp_path):
    path = write_cfg(tmp_path)
    cli.main(["linear", "--config", path, "--out", str(tmp_path / "s1"), "--seed", "5"])
    cli.main(["linear", "--config", path, "--out", str(tmp_path / "s2"), "--seed", "6"])
    f1 = json.loads((tmp_path / "s1" / "result.json").read_text())["f"]
    f2 = json.loads((tmp_path / "s2" / "result.json").read_text())["f"]
    assert f1 != f2


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": 7}')
    assert cli.main(["solve", "--config", str(bad), "--out", str(tmp_path / "x")]) == cli.EXIT_PRECOND
    code, _ = run(tmp_path, "solve", data={"random": {"seed": 1, "hk_norm": 5.0}})
    assert code == cli.EXIT_PRECOND
    code, out = run(tmp_path, "solve", "div", data={"random": {"seed": 1, "hk_norm": 40.0}},
                    solver={"max_data_norm": 1e9})
    assert code == cli.EXIT_NONCONV
    assert json.loads((out / "result.json").read_text())["converged"] is False
    code, _ = run(tmp_path, "sweep", "ax", sweep={"axis": "bogus", "values": [1]})
    assert code == cli.EXIT_PRECOND


def test_sweep_command(tmp_path):
    code, out = run(tmp_path, "sweep", sweep={"axis": "data_norm", "values": [0.1, 0.3]})
    assert code == cli.EXIT_OK
    rows = list(csv.DictReader(open(out / "sweep.csv")))
    assert [r["status"] for r in rows] == ["ok", "ok"]
    assert float(rows[0]["hk_norm_f"]) == pytest.approx(0.1)
    assert (out / "run_001" / "result.json").exists()


def test_flow_command(tmp_path):
    code, out = run(tmp_path, "flow", flow={"count": 4, "seed": 1})
    assert code == cli.EXIT_OK
    result = json.loads((out / "result.json").read_text())
    assert result["misclassified"] == 0 and result["nu_monotone"]
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "run,t,x,y,nu,mu,p"


def test_selfcheck_subset(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(acceptance, "CRITERIA", [acceptance.criterion_12])
    assert cli.main(["selfcheck", "--out", str(tmp_path)]) == cli.EXIT_OK
    assert "[PASS] C12" in capsys.readouterr().out
    monkeypatch.setattr(acceptance, "CRITERIA", [lambda: 1 / 0])
    assert cli.main(["selfcheck"]) == cli.EXIT_ORACLE


def test_zero_data_and_empty_sweep(tmp_path):
    code, out = run(tmp_path, "linear", "z", data={"zero": True})
    assert code == cli.EXIT_OK
    result = json.loads((out / "result.json").read_text())
    assert all(v == [0, 0] for v in result["b0"]["coeffs"])
    code, out = run(tmp_path, "sweep", "e", sweep={"axis": None, "values": []})
    assert code == cli.EXIT_OK
    assert len(list(csv.DictReader(open(out / "sweep.csv")))) == 1


def test_single_mode_reports_free_multiplier(tmp_path):
    code, out = run(tmp_path, "linear", "m", data={"single_mode": {"ell": 2}})
    assert code == cli.EXIT_OK
    mult = json.loads((out / "result.json").read_text())["multiplier"][2]
    assert complex(*mult) == pytest.approx(np.exp(-1j * (2.5 * np.pi + np.pi / 2)), abs=1e-10)
