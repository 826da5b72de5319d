import json

import numpy as np
import pytest

from nblab import checks, cli, report


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_usage_errors(tmp_path, capsys):
    assert run("bogus") == 2
    assert run("verify", "--suite", "nope") == 2
    assert run("distance", "--n-max", 0, "--out", tmp_path) == 2
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "classical", "colour": "red"}))
    assert run("distance", "--config", cfg) == 2
    assert "colour" in capsys.readouterr().err
    assert run("mc", "--family", "invgamma", "--n-max", 2, "--out", tmp_path / "empty") == 2
    assert run("moments", "--family", "classical", "--out", tmp_path) == 2
    assert run("distance", "--config", tmp_path / "missing.json") == 2


def test_version(capsys):
    assert run("--version") == 0


def test_config_validation():
    with pytest.raises(cli.UsageError):
        cli.RunConfig.from_dict({"y": {"y": "weird"}})
    with pytest.raises(cli.UsageError):
        cli.RunConfig.from_dict({"mc_N": [0]})
    cfg = cli.RunConfig.from_dict({"family": "invgamma", "n_max": 3})
    assert cli.RunConfig.from_dict(cfg.to_json()) == cfg


def test_classical_distance_outputs(tmp_path):
    assert run("distance", "--family", "classical", "--n-max", 4, "--out", tmp_path) == 0
    rows = report.read_table(tmp_path / "distance_classical.csv")
    assert [r["n"] for r in rows] == [1, 2, 3, 4]
    d = [r["D2"] for r in rows]
    assert all(a >= b for a, b in zip(d, d[1:]))
    assert all(r["status"] == "ok" for r in rows)
    js = report.read_json(tmp_path / "distance_classical_n2.json")
    assert js["D2"] == d[1] and len(js["coefficients"]) == 2


def test_refusal_is_a_row(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "classical", "n_max": 3, "max_condition": 2.0, "out": str(tmp_path)}))
    assert run("distance", "--config", cfg) == 0
    rows = report.read_table(tmp_path / "distance_classical.csv")
    assert rows[-1]["status"].startswith("refused")


def test_gram_outputs(tmp_path):
    assert run("gram", "--family", "recursive", "--n-max", 4, "--out", tmp_path) == 0
    G = report.read_matrix(tmp_path / "gram_recursive.csv")
    assert G.shape == (4, 4) and np.array_equal(G, G.T)
    assert report.read_header(tmp_path / "gram_recursive.csv")["symmetric"] is True
    assert len(report.read_table(tmp_path / "rhs_recursive.csv")) == 4


def test_moments_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "recursive", "moments_j_max": 8, "grid_t_max": 5.0,
                               "out": str(tmp_path)}))
    assert run("moments", "--config", cfg) == 0
    rows = report.read_table(tmp_path / "moments.csv")
    assert len(rows) == 9
    m = [r["m_j"] for r in rows]
    for j in range(1, 8, 2):
        assert abs(m[j]) <= 1e-14 * np.sqrt(m[j - 1] * m[j + 1])
    assert all(x > 0 for x in m[::2])
    assert report.read_header(tmp_path / "moments.csv")["m0_rel_diff"] < 1e-8
    grid = np.loadtxt(tmp_path / "weight_grid.dat")
    assert np.all(np.diff(grid[:, 0]) > 0) and np.all(grid[:, 1] > 0)
    assert grid[-1, 0] == 5.0


def test_mc_reproducible(tmp_path):
    base = {"family": "invgamma", "n_max": 1, "coefficients": [0.4], "mc_N": [2, 4], "mc_seeds": 3}
    for d in ("a", "b"):
        cfg = tmp_path / f"{d}.json"
        cfg.write_text(json.dumps(dict(base, out=str(tmp_path / d))))
        assert run("mc", "--config", cfg, "--seed", 9) == 0
    a = report.read_table(tmp_path / "a" / "mc" / "summary.csv")
    b = report.read_table(tmp_path / "b" / "mc" / "summary.csv")
    assert a == b and [r["N"] for r in a] == [2, 4]
    rec = report.read_json(tmp_path / "a" / "mc" / "N4_seed10.json")
    assert rec["seed"] == 10 and len(rec["witness_thetas"][0]) == 4


def test_mc_guard_is_usage_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "invgamma", "coefficients": [1.0, 1.0], "mc_N": [512],
                               "out": str(tmp_path)}))
    assert run("mc", "--config", cfg) == 2


def test_verify_exit_codes(monkeypatch, tmp_path, capsys):
    monkeypatch.setitem(checks.SUITES, "tiny", [lambda: checks.Check("ok", 0.0, 1.0)])
    assert run("verify", "--suite", "tiny", "--out", tmp_path) == 0
    assert report.read_json(tmp_path / "verify_tiny.json")["results"][0]["passed"] is True
    monkeypatch.setitem(checks.SUITES, "tiny", [lambda: checks.Check("bad", 2.0, 1.0)])
    assert run("verify", "--suite", "tiny") == 1
    assert '"bad"' in capsys.readouterr().out


def test_verify_specfun_suite():
    assert run("verify", "--suite", "specfun") == 0
