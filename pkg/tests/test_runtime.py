import importlib
import json
import logging
import os

import numpy as np
import pytest


def _rt():
    return importlib.import_module("deepcond.runtime")


def _errors():
    return importlib.import_module("deepcond.errors")


def test_defaults_apply_without_sources():
    cfg = _rt().resolve_config("profile", {}, environ={})
    assert cfg.seed == 0
    assert cfg.threads == 1
    assert cfg["L_max"] == 60
    assert cfg["synthetic"] == [8, 0.1, 0]
    assert cfg.as_dict()["subcommand"] == "profile"


def test_precedence_env_then_file_then_flags(tmp_path):
    rt = _rt()
    env = {rt.ENV_SEED: "7", rt.ENV_THREADS: "2"}
    assert rt.resolve_config("simulate", {}, environ=env).seed == 7

    path = tmp_path / "run.json"
    path.write_text(json.dumps({"subcommand": "simulate", "seed": 11, "trials": 5}), encoding="utf-8")
    from_file = rt.resolve_config("simulate", {}, str(path), environ=env)
    assert from_file.seed == 11
    assert from_file.threads == 2
    assert from_file["trials"] == 5

    flagged = rt.resolve_config("simulate", {"seed": "13", "m": "64,128"}, str(path), environ=env)
    assert flagged.seed == 13
    assert flagged["m"] == [64, 128]
    assert flagged["trials"] == 5


def test_environment_is_read_from_os(monkeypatch):
    rt = _rt()
    monkeypatch.setenv(rt.ENV_SEED, "21")
    monkeypatch.delenv(rt.ENV_THREADS, raising=False)
    assert rt.resolve_config("train", {}).seed == 21


def test_config_errors(tmp_path):
    rt = _rt()
    errors = _errors()
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"bogus": 1}), encoding="utf-8")
    with pytest.raises(errors.ConfigurationError) as exc:
        rt.resolve_config("profile", {}, str(unknown), environ={})
    assert exc.value.details["unknown"] == ["bogus"]

    other = tmp_path / "other.json"
    other.write_text(json.dumps({"subcommand": "train"}), encoding="utf-8")
    with pytest.raises(errors.ConfigurationError):
        rt.resolve_config("profile", {}, str(other), environ={})

    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "seed": 1,\n  oops\n}', encoding="utf-8")
    with pytest.raises(errors.ParseError) as exc:
        rt.resolve_config("profile", {}, str(broken), environ={})
    assert exc.value.line == 3

    with pytest.raises(errors.ConfigurationError):
        rt.resolve_config("profile", {"format": "xml"}, environ={})
    with pytest.raises(errors.ConfigurationError):
        rt.resolve_config("profile", {"trials": 3}, environ={})
    with pytest.raises(errors.ConfigurationError):
        rt.resolve_config("profile", {"threads": 0}, environ={})
    with pytest.raises(errors.ConfigurationError):
        rt.resolve_config("nope", {}, environ={})


def test_config_hash_ignores_key_order():
    rt = _rt()
    a = rt.config_hash({"seed": 1, "m": [2, 3], "nested": {"x": 1.5, "y": None}})
    b = rt.config_hash({"nested": {"y": None, "x": 1.5}, "m": [2, 3], "seed": 1})
    assert a == b
    assert len(a) == 64
    assert a != rt.config_hash({"seed": 2, "m": [2, 3], "nested": {"x": 1.5, "y": None}})


def test_provenance_shape():
    prov = _rt().provenance({"seed": 3}, 3)
    assert set(prov) == {"version", "config_hash", "seed", "environment", "config"}
    assert set(prov["environment"]["libs"]) == {"numpy", "scipy"}


def test_dumps_csv_format():
    text = _rt().dumps_csv(["a", "b", "c"], [[0.1, None, True], [1, float("nan"), "x"]], header={"seed": 4})
    lines = text.split("\r\n")
    assert lines[0] == "# seed: 4"
    assert lines[1] == "a,b,c"
    assert lines[2] == "0.10000000000000001,,true"
    assert lines[3] == "1,nan,x"
    assert text.endswith("\r\n")


def test_write_json_is_indented_and_atomic(tmp_path):
    rt = _rt()
    path = tmp_path / "out" / "result.json"
    rt.write_json(str(path), {"ok": True, "values": np.array([1.0, 2.0]), "bad": float("nan")})
    text = path.read_text(encoding="utf-8")
    assert text.startswith('{\n  "ok": true')
    assert json.loads(text) == {"ok": True, "values": [1.0, 2.0], "bad": None}
    rt.write_json(str(path), {"ok": False})
    assert json.loads(path.read_text(encoding="utf-8")) == {"ok": False}
    assert os.listdir(path.parent) == ["result.json"]


def test_write_csv_round_trips_through_read_matrix(tmp_path):
    rt = _rt()
    path = tmp_path / "m.csv"
    rt.write_csv(str(path), ["x", "y"], [[0.5, 1.0], [1.0, 0.5]], header={"note": "gram"})
    # the column header row is not numeric
    with pytest.raises(_errors().ParseError) as exc:
        rt.read_matrix(str(path))
    assert exc.value.line == 2


def test_read_matrix_csv(tmp_path):
    rt = _rt()
    path = tmp_path / "gram.csv"
    path.write_text("# gram\n1, 0.5\n\n0.5, 1\n", encoding="utf-8")
    assert np.array_equal(rt.read_matrix(str(path)), [[1.0, 0.5], [0.5, 1.0]])


def test_read_matrix_csv_errors(tmp_path):
    rt = _rt()
    errors = _errors()
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,0\n0,1,2\n", encoding="utf-8")
    with pytest.raises(errors.ParseError) as exc:
        rt.read_matrix(str(ragged))
    assert exc.value.line == 2
    assert exc.value.details["line"] == 2
    words = tmp_path / "words.csv"
    words.write_text("# c\n1,0\nfoo,1\n", encoding="utf-8")
    with pytest.raises(errors.ParseError) as exc:
        rt.read_matrix(str(words))
    assert exc.value.line == 3
    empty = tmp_path / "empty.csv"
    empty.write_text("# nothing\n", encoding="utf-8")
    with pytest.raises(errors.ParseError):
        rt.read_matrix(str(empty))
    with pytest.raises(errors.ParseError):
        rt.read_matrix(str(tmp_path / "missing.csv"))


def test_read_matrix_json(tmp_path):
    rt = _rt()
    errors = _errors()
    path = tmp_path / "k.json"
    path.write_text(json.dumps({"gram": [[1, 0.2], [0.2, 1]]}), encoding="utf-8")
    assert np.array_equal(rt.read_matrix(str(path)), [[1.0, 0.2], [0.2, 1.0]])
    bare = tmp_path / "x.json"
    bare.write_text(json.dumps([[0.6, 0.8]]), encoding="utf-8")
    assert rt.read_matrix(str(bare)).shape == (1, 2)
    ragged = tmp_path / "r.json"
    ragged.write_text(json.dumps({"inputs": [[1, 0], [1]]}), encoding="utf-8")
    with pytest.raises(errors.ParseError):
        rt.read_matrix(str(ragged))
    both = tmp_path / "b.json"
    both.write_text(json.dumps({"gram": [[1]], "inputs": [[1]]}), encoding="utf-8")
    with pytest.raises(errors.ParseError):
        rt.read_matrix(str(both))


def test_configure_logging_is_idempotent():
    rt = _rt()
    rt.configure_logging("INFO")
    logger = rt.configure_logging("DEBUG")
    tagged = [h for h in logger.handlers if getattr(h, "_deepcond", False)]
    assert len(tagged) == 1
    assert logger.level == logging.DEBUG
    rt.configure_logging("WARNING")


def test_timed_logs_duration(caplog):
    rt = _rt()
    logger = logging.getLogger("deepcond.test")
    with caplog.at_level(logging.INFO, logger="deepcond.test"):
        with rt.timed(logger, "stage"):
            pass
    assert any(r.getMessage().startswith("stage done (") for r in caplog.records)
