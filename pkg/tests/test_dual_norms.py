import importlib

import pytest


def _dual():
    return importlib.import_module("deepcond.dual")


def test_hypotheses_for_odd_activations():
    dual = _dual()
    tanh = dual.check_activation_hypotheses(dual.get_activation("tanh-normalized"))
    assert tanh == {"odd": True, "monotone": True, "concave_on_positives": True, "ok": True}
    relu = dual.check_activation_hypotheses(dual.get_activation("relu-normalized"))
    assert not relu["odd"]
    assert not relu["ok"]


def test_norm_map_concave_and_contracting():
    dual = _dual()
    for name in ("tanh-normalized", "normrelu"):
        spec = dual.get_activation(name)
        assert dual.check_norm_concavity(spec)["ok"], name
        result = dual.check_norm_contraction(spec)
        assert result["ok"], (name, result["issues"][:3])
        assert result["alpha"] > 0


def test_dot_product_series_matches_quadrature():
    dual = _dual()
    spec = dual.get_activation("normrelu")
    for gx, gy, rho in ((0.8, 1.3, 0.4), (0.5, 2.0, -0.6), (1.0, 1.0, 0.9)):
        series = dual.dot_product_map(spec, gx, gy, rho)
        quad = dual.dot_product_quadrature(spec, gx, gy, rho)
        assert series == pytest.approx(quad, abs=1e-5)


def test_dot_product_map_reduces_to_dual_at_unit_norms():
    dual = _dual()
    spec = dual.get_activation("tanh-normalized")
    d = dual.dual_activation(spec)
    for rho in (-0.7, 0.0, 0.3, 0.8):
        assert dual.dot_product_map(spec, 1.0, 1.0, rho) == pytest.approx(dual.dual_eval(d, rho), abs=1e-9)


def test_dot_product_monotonicity_for_tanh():
    dual = _dual()
    result = dual.check_dot_product_monotonicity(dual.get_activation("tanh-normalized"))
    assert result["ok"], result["issues"][:3]


def test_norm_window_enforced():
    dual = _dual()
    errors = importlib.import_module("deepcond.errors")
    spec = dual.get_activation("tanh-normalized")
    with pytest.raises(errors.DomainError):
        dual.dot_product_map(spec, 0.01, 1.0, 0.5)
    with pytest.raises(errors.DomainError):
        dual.dot_product_map(spec, 1.0, 1.0, 1.5)
    with pytest.raises(errors.DomainError):
        dual.norm_transfer(spec).value(-1.0)
