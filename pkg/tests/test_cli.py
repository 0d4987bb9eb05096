import importlib
import json

import pytest


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    rt = importlib.import_module("deepcond.runtime")
    monkeypatch.delenv(rt.ENV_SEED, raising=False)
    monkeypatch.delenv(rt.ENV_THREADS, raising=False)


def _run(argv):
    return importlib.import_module("deepcond.cli.main").main(argv)


def _failure(err):
    return json.loads(err.strip().splitlines()[-1])


def test_normrelu_json(capsys):
    assert _run(["normrelu", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] is True
    values = dict(out["rows"])
    assert values["lambda"] == pytest.approx(1.05, abs=0.01)
    assert values["L_hat"] == 167
    assert out["provenance"]["config"]["subcommand"] == "normrelu"
    assert "out" not in out["provenance"]["config"]


def test_bad_flag_value_is_a_usage_error(capsys):
    assert _run(["normrelu", "--c", "abc"]) == 2
    err = _failure(capsys.readouterr().err)
    assert err["ok"] is False
    assert err["classification"] == "usage_error"


def test_dual_table(capsys):
    assert _run(["dual-table", "--activations", "relu,identity", "--rho-points", "3", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["columns"] == ["activation", "rho", "sigmaHat", "mu", "muTilde"]
    rows = {(r[0], r[1]): r[2] for r in out["rows"]}
    assert rows[("relu", -1.0)] == pytest.approx(0.0, abs=1e-9)
    assert rows[("relu", 1.0)] == pytest.approx(0.5, abs=1e-9)
    assert rows[("identity", 0.0)] == pytest.approx(0.0, abs=1e-12)
    assert out["summary"]["activations"]["identity"]["mu"] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("names", ["", "relu,bogus"])
def test_dual_table_rejects_bad_activation_lists(capsys, names):
    assert _run(["dual-table", "--activations", names]) == 2
    assert _failure(capsys.readouterr().err)["classification"] == "usage_error"


def test_profile_writes_csv_with_verdict(tmp_path, capsys):
    path = tmp_path / "profile.csv"
    assert _run(["profile", "--synthetic", "8", "0.1", "0", "--L-max", "60", "--out", str(path)]) == 0
    assert capsys.readouterr().out == ""
    text = path.read_text(encoding="utf-8")
    assert "# verdict: true\r\n" in text
    assert "bounds-respected=true" in text
    body = [line for line in text.split("\r\n") if line and not line.startswith("#")]
    assert len(body) == 62


def test_profile_zero_depth(capsys):
    assert _run(["profile", "--synthetic", "4", "0.3", "1", "--L-max", "0", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["rows"]) == 1


def test_profile_malformed_gram(tmp_path, capsys):
    path = tmp_path / "gram.csv"
    path.write_text("1,0\nfoo,1\n", encoding="utf-8")
    assert _run(["profile", "--gram", str(path)]) == 2
    err = _failure(capsys.readouterr().err)
    assert err["classification"] == "parse_error"
    assert err["details"]["line"] == 2


def test_simulate_decay_is_deterministic(capsys):
    argv = ["simulate", "decay", "--m", "256", "--L", "4", "--trials", "5", "--seed", "9", "--format", "json"]
    first = _run(argv)
    a = capsys.readouterr().out
    second = _run(argv)
    b = capsys.readouterr().out
    assert first == second
    assert a == b
    assert len(json.loads(a)["rows"]) == 5


def test_simulate_bn_invariance(capsys):
    assert _run(["simulate", "bn-invariance", "--activation", "relu", "--m", "64"]) == 0
    assert "# verdict: true" in capsys.readouterr().out


def test_train_interpolate_zero_labels(capsys):
    assert _run(["train", "interpolate", "--labels", "zeros", "--n", "6", "--delta", "0.2", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["summary"]["max_residual"] == 0.0
    assert len(out["rows"]) == 6


def test_train_gd(capsys):
    argv = ["train", "gd", "--n", "6", "--delta", "0.2", "--width", "256", "--T", "100", "--format", "json"]
    assert _run(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["summary"]["verdict"] == "rate-envelope=true"
    assert len(out["rows"]) == 101


def test_train_risk_rows(capsys):
    argv = ["train", "risk", "--labels", "zeros", "--n", "8,16,32", "--n-test", "100", "--format", "json"]
    assert _run(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r[0] for r in out["rows"]] == [8, 16, 32]


def test_config_file_then_flags(tmp_path, capsys):
    path = tmp_path / "normrelu.json"
    path.write_text(json.dumps({"subcommand": "normrelu", "c": -1.0, "format": "json"}), encoding="utf-8")
    assert _run(["normrelu", "--config", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["summary"]["c"] == -1.0
    assert _run(["normrelu", "--config", str(path), "--c", "-2.0"]) == 0
    assert json.loads(capsys.readouterr().out)["summary"]["c"] == -2.0


def test_unknown_config_key(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"widht": 3}), encoding="utf-8")
    assert _run(["train", "--config", str(path)]) == 2
    assert _failure(capsys.readouterr().err)["classification"] == "configuration_error"
