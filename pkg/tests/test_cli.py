import json
import subprocess
import sys

import numpy as np
import pytest

from frenetgeo.cli import dumps, parse_spec, read_csv, run, write_csv
from frenetgeo.errors import ConfigError


def test_parse_spec():
    assert parse_spec("euclidean") == ("euclidean", {})
    assert parse_spec("sphere:k=2,m=3") == ("sphere", {"k": 2, "m": 3})
    assert parse_spec("g_kappa_tau:1,0.5") == ("g_kappa_tau", [1, 0.5])
    assert parse_spec("solvable_group:mu=null") == ("solvable_group", {"mu": None})
    with pytest.raises(ConfigError):
        parse_spec("sphere:k=1,2")


def test_dumps_is_exact_and_ordered():
    obj = {"b": np.float64(0.1), "a": [np.int64(2), np.bool_(True)], "c": np.arange(2.0)}
    text = dumps(obj)
    assert list(json.loads(text)) == ["b", "a", "c"]
    assert json.loads(text)["b"] == 0.1


def test_csv_round_trip_exact(tmp_path):
    rows = np.random.default_rng(0).normal(size=(5, 3))
    path = tmp_path / "x.csv"
    write_csv(str(path), ["t", "x1", "x2"], rows)
    header, data = read_csv(str(path))
    assert header == ["t", "x1", "x2"]
    assert np.array_equal(data, rows)


def test_curvatures_circle(tmp_path):
    out = tmp_path / "k.csv"
    assert run(["curvatures", "--curve", "circle", "--t0", "0", "--t1", "1", "--n", "3",
                "--out", str(out)]) == 0
    header, data = read_csv(str(out))
    assert header[:3] == ["t", "kappa0", "kappa1"]
    np.testing.assert_allclose(data[:, 1:3], 1.0, atol=1e-12)


def test_reconstruct_round_trip(tmp_path):
    cfg = {"metric": "sphere:k=1,m=2", "x0": [0.1, 0.0], "kappas": {"constant": [1.0, 0.5]},
           "t_span": [0.0, 1.0], "frame0": [[0.505, 0.0], [0.0, 0.505]], "step": 1e-3}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out, rep = tmp_path / "curve.csv", tmp_path / "rep.json"
    assert run(["reconstruct", "--config", str(cfg_path), "--out", str(out),
                "--report", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["kappa_error"] < 1e-6 and report["drift"] < 1e-10
    header, data = read_csv(str(out))
    assert header[:3] == ["t", "x1", "x2"] and data.shape[0] == 1001
    # the reconstructed samples feed back into the curvature command
    samples = tmp_path / "samples.csv"
    write_csv(str(samples), ["t", "x1", "x2"], data[:, :3])
    kout = tmp_path / "k.csv"
    assert run(["curvatures", "--curve-csv", str(samples), "--preset", "sphere:k=1,m=2",
                "--t0", "0.3", "--t1", "0.7", "--n", "3", "--out", str(kout)]) == 0
    np.testing.assert_allclose(read_csv(str(kout))[1][:, 1:3], [[1.0, 0.5]] * 3, atol=1e-6)
    cfg["frame0"] = [[0.6, 0.0], [0.0, 0.505]]
    cfg_path.write_text(json.dumps(cfg))
    assert run(["reconstruct", "--config", str(cfg_path), "--out", str(out)]) == 1


def test_congruence_exit_codes(tmp_path):
    out = tmp_path / "c.json"
    assert run(["congruence", "--a", "helix", "--b", "helix", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["verdict"] == "congruent"
    assert run(["congruence", "--a", "torus_top_circle", "--b", "plane_circle:k=0.5",
                "--j-max", "1", "--out", str(out)]) == 2
    rep = json.loads(out.read_text())
    assert rep["verdict"] == "not_congruent"
    assert rep["tensor_residuals"]["1"]["max"] == pytest.approx(0.5, abs=1e-6)
    assert run(["congruence", "--a", "circle:r=1", "--b", "circle:r=1.000003",
                "--out", str(out)]) == 3


def test_invariants_and_ranks(tmp_path):
    out = tmp_path / "i.csv"
    assert run(["invariants", "--curve", "torus_top_circle", "--t0", "0", "--t1", "1",
                "--n", "2", "--out", str(out)]) == 0
    header, data = read_csv(str(out))
    assert "I1" in header
    rout = tmp_path / "r.json"
    assert run(["ranks", "--preset", "g_kappa_tau:1,0.5", "--rmax", "3", "--samples", "6",
                "--out", str(rout)]) == 0
    tab = json.loads(rout.read_text())
    assert [row["N_r"] for row in tab["rows"]] == [1, 3, 6, 9]


def test_presets_and_selfcheck(tmp_path, capsys):
    assert run(["presets"]) == 0
    listing = json.loads(capsys.readouterr().out)
    assert "g_kappa_tau" in json.dumps(listing)
    assert run(["selfcheck", "--preset", "torus_example1"]) == 0
    assert json.loads(capsys.readouterr().out)


def test_config_conflict_and_errors(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5}))
    assert run(["presets", "--config", str(cfg), "--seed", "6"]) == 1
    assert "ConfigError" in capsys.readouterr().err
    assert run(["presets", "--config", str(cfg), "--seed", "5"]) == 0
    assert run(["ranks", "--preset", "no_such_space"]) == 1
    assert run(["congruence", "--a", "helix", "--b", "helix", "--window", "-1"]) == 1
    cfg.write_text("[1, 2]")
    assert run(["presets", "--config", str(cfg)]) == 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "frenetgeo", "presets"], capture_output=True,
                         text=True, timeout=120)
    assert res.returncode == 0 and "euclidean" in res.stdout
