import importlib
import math

import numpy as np
import pytest


def _setup(name, n=8, delta=0.1, seed=0):
    cond = importlib.import_module("deepcond.conditioning")
    dual = importlib.import_module("deepcond.dual")
    K = cond.gram_from_inputs(cond.synthetic_unit_inputs(n, delta, seed))
    return cond, dual.dual_activation(dual.get_activation(name)), K


def test_top_layer_bounds_hold_for_every_normalized_builtin():
    dual = importlib.import_module("deepcond.dual")
    for name in dual.NORMALIZED_BUILTINS:
        for delta in (0.05, 0.2, 0.5):
            cond, d, K = _setup(name, delta=delta)
            profile = cond.verify_top_layer(K, d, 100)
            assert profile.ok, (name, delta, profile.issues[:3])
            assert profile.bounds_checked
            assert len(profile.records) == 101


def test_top_layer_kappa_approaches_one():
    cond, d, K = _setup("relu-normalized")
    profile = cond.verify_top_layer(K, d, 60)
    kappas = [r.kappa for r in profile.records]
    assert kappas[-1] < kappas[0]
    assert kappas[-1] == pytest.approx(1.0, abs=1e-2)
    assert profile.params.l1 == cond.depth_thresholds(d.mu, profile.delta_separation, 8).l1


def test_kappa_past_l1_never_exceeds_kappa_at_l1():
    cond, d, K = _setup("relu-normalized")
    l1 = cond.verify_top_layer(K, d, 0).params.l1
    profile = cond.verify_top_layer(K, d, l1 + 20)
    at_l1 = profile.records[l1].kappa
    assert profile.records[l1].depth == l1
    for rec in profile.records[l1:]:
        assert rec.kappa <= at_l1 * (1 + 1e-9), rec.depth


def test_zero_depth_profile_has_one_row():
    cond, d, K = _setup("relu-normalized")
    profile = cond.verify_top_layer(K, d, 0)
    assert len(profile.records) == 1
    rec = profile.records[0]
    assert rec.depth == 0
    assert rec.bound_b == pytest.approx(1.0 - profile.delta_separation)
    assert math.isnan(rec.bound_kappa)


def test_identical_inputs_are_rejected():
    cond, d, _ = _setup("relu-normalized")
    errors = importlib.import_module("deepcond.errors")
    K = cond.gram_from_inputs([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(errors.PreconditionError) as exc:
        cond.verify_top_layer(K, d, 5)
    assert exc.value.details["pair"] == [0, 1]


def test_linear_activation_skips_bounds():
    cond, d, K = _setup("identity")
    profile = cond.verify_top_layer(K, d, 5)
    assert profile.ok
    assert not profile.bounds_checked
    assert profile.params is None
    assert all(math.isnan(r.bound_b) for r in profile.records)
    # identity leaves the kernel untouched
    assert profile.records[-1].kappa == pytest.approx(profile.records[0].kappa)


def test_threads_do_not_change_profile():
    cond, d, K = _setup("tanh-normalized", n=6, delta=0.2)
    one = cond.verify_top_layer(K, d, 20, threads=1)
    four = cond.verify_top_layer(K, d, 20, threads=4)
    for a, b in zip(one.records, four.records):
        assert np.allclose(a.row(), b.row(), equal_nan=True)
    assert one.issues == four.issues


def test_ntk_profile_bounds():
    cond, d, K = _setup("relu-normalized", delta=0.2)
    profile = cond.verify_ntk(K, d, 40)
    assert profile.ok, profile.issues[:3]
    assert profile.kind == "ntk"
    diag = [r.diagonal for r in profile.records]
    assert diag[0] == pytest.approx(1.0)
    assert diag[3] == pytest.approx(cond.ntk_diagonal(d, 3))
    assert profile.records[-1].kappa < profile.records[0].kappa
    assert all(not math.isnan(r.bound_lambda_min) for r in profile.records)
    assert all(r.lambda_min >= r.bound_lambda_min - 1e-9 for r in profile.records)


def test_profile_summary_shape():
    cond, d, K = _setup("relu-normalized")
    summary = cond.verify_top_layer(K, d, 10).summary()
    assert summary["ok"] is True
    assert summary["classification"] == "verified"
    assert set(summary["thresholds"]) == {"L0", "L1", "L2"}
    assert summary["n"] == 8
