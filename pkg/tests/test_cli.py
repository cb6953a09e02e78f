import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from martail import MarModel, predict_level_and_ratio_mar11
from martail.cli import load_series, main
from martail.discrete import DiscretePrediction
from martail.errors import EmptyFile, ParseError
from martail.simulate import simulate_trajectory


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"phi": [0.6], "psi": [0.4], "innovation": {"family": "cauchy"}}))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_load_plain(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("1.0\n2.5\n")
    assert list(load_series(p)) == [1.0, 2.5]


def test_load_csv_header(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("date,value\n2018-07-02,361.25\n")
    assert list(load_series(p)) == [361.25]


def test_load_parse_error_line(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("1\n2\nabc\n")
    with pytest.raises(ParseError) as err:
        load_series(p)
    assert err.value.context["line"] == 3


def test_load_empty(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("\n\n")
    with pytest.raises(EmptyFile):
        load_series(p)


def test_coeffs_csv(model_file, tmp_path):
    out = tmp_path / "c.csv"
    assert main(["coeffs", "--model", model_file, "--H", "50", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["h", "a", "b", "c"]
    assert len(rows) == 101
    co = MarModel((0.6,), (0.4,)).coefficients(50)
    # 17 significant digits: values re-parse exactly
    assert np.array_equal([float(r[3]) for r in rows], co.c)


def test_predict_json_matches_module(model_file, capsys):
    assert main(["predict", "--model", model_file, "--condition", "level_and_ratio", "--r", "2"]) == 0
    got = DiscretePrediction.from_dict(json.loads(capsys.readouterr().out))
    expect = predict_level_and_ratio_mar11(MarModel((0.6,), (0.4,)), 2.0)
    assert np.array_equal(got.atoms, expect.atoms) and np.array_equal(got.weights, expect.weights)


def test_tail_commands(model_file, capsys):
    for what in ("drift", "forward", "turning", "one-sided", "first-exceedance"):
        assert main(["tail", "--model", model_file, "--what", what]) == 0
        json.loads(capsys.readouterr().out)


def test_predict_density_and_dbj(model_file, tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert main(["predict", "--model", model_file, "--condition", "density", "--y", "100", "--r", "2", "--grid", "0:3:31", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["r_next", "density"] and len(rows) == 31
    m02 = tmp_path / "m02.json"
    m02.write_text(json.dumps({"phi": [], "psi": [1.0, -0.24]}))
    assert main(["predict", "--model", str(m02), "--condition", "dbj", "--r", "2", "--J", "5"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["provenance"] == "dbj_atoms_only" and data["weights"][0] is None


def test_montecarlo_fig8(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["montecarlo", "--experiment", "fig8", "--seed", "1", "--out", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == ["bin_left", "bin_right", "count"]
    left = np.array([float(r[0]) for r in rows])
    counts = np.array([int(r[2]) for r in rows])
    inner = np.arange(2, counts.size - 2)
    peaks = inner[(counts[inner] > counts[inner - 1]) & (counts[inner] >= counts[inner + 1]) & (counts[inner] > 100)]
    centres = left[peaks] + 0.01
    for target in (0.0, 1.0, 1.6):
        assert np.min(np.abs(centres - target)) <= 0.1


def test_seed_required(model_file, capsys):
    assert main(["simulate", "--model", model_file, "--T", "100"]) == 2
    assert "error[Usage]" in capsys.readouterr().err


def test_simulate_fit_diagnose_pipeline(model_file, tmp_path, capsys):
    series = tmp_path / "s.csv"
    fit = tmp_path / "fit.json"
    panel = tmp_path / "p.csv"
    assert main(["simulate", "--model", model_file, "--T", "1500", "--seed", "4", "--out", str(series)]) == 0
    _, rows = read_csv(series)
    expect = simulate_trajectory(MarModel((0.6,), (0.4,)), 1500, 4).values
    assert np.array_equal([float(r[1]) for r in rows], expect)
    assert main(["fit", "--input", str(series), "--out", str(fit)]) == 0
    assert abs(json.loads(fit.read_text())["phi"] - 0.6) < 0.05
    assert main(["diagnose", "--input", str(series), "--fit", str(fit), "--out", str(panel)]) == 0
    header, rows = read_csv(panel)
    assert header[0] == "h" and len(rows) == 61
    assert "pattern" in json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.mark.parametrize(
    "phi,code,tag",
    [([1.2], 2, "NonStationary")],
)
def test_model_error_exit(tmp_path, capsys, phi, code, tag):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"phi": phi, "psi": [0.4]}))
    assert main(["coeffs", "--model", str(bad)]) == code
    err = capsys.readouterr().err
    assert err.startswith(f"error[{tag}]")


def test_data_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1\n2\nabc\n")
    assert main(["fit", "--input", str(bad)]) == 3
    assert "error[ParseError]" in capsys.readouterr().err


def test_numeric_error_exit(tmp_path, capsys):
    m10 = tmp_path / "m10.json"
    m10.write_text(json.dumps({"phi": [0.5], "psi": []}))
    assert main(["predict", "--model", str(m10), "--condition", "online"]) == 4
    assert "error[EmptyConditioningSet]" in capsys.readouterr().err


def test_config_file_and_precedence(model_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": model_file, "condition": "level_and_ratio", "r": 0.6}))
    assert main(["--config", str(cfg), "predict"]) == 0
    point = json.loads(capsys.readouterr().out)
    assert len(point["weights"]) == 1
    assert main(["--config", str(cfg), "predict", "--r", "2"]) == 0
    assert len(json.loads(capsys.readouterr().out)["weights"]) == 2


def test_module_entry_point_help():
    res = subprocess.run([sys.executable, "-m", "martail", "predict", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for flag in ("--model", "--condition", "--r", "--ratios", "--grid"):
        assert flag in res.stdout
