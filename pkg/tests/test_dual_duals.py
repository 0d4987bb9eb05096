import dataclasses
import importlib
import math

import numpy as np
import pytest


def _dual(name, **params):
    dual = importlib.import_module("deepcond.dual")
    return dual, dual.dual_activation(dual.get_activation(name, **params))


def test_series_matches_closed_form_away_from_one():
    for name in ("relu-normalized", "sign", "exp-normalized"):
        dual, d = _dual(name)
        rho = np.linspace(-0.5, 0.5, 21)
        series = dual.dual_eval(d, rho, use_closed_form=False)
        closed = dual.dual_eval(d, rho)
        assert np.allclose(series, closed, atol=1e-6), name


def test_folded_tail_keeps_unit_value():
    for name in ("relu-normalized", "tanh-normalized", "normrelu"):
        dual, d = _dual(name)
        assert dual.dual_eval(d, 1.0, use_closed_form=False) == pytest.approx(1.0, abs=1e-6), name
        assert d.tail_degree > d.degree


def test_parity_of_tail_degree():
    tail_degree = importlib.import_module("deepcond.dual.duals").tail_degree
    even = np.array([0.5, 0.0, 0.5])
    odd = np.array([0.0, 0.5, 0.0, 0.5])
    mixed = np.array([0.2, 0.3, 0.5])
    assert tail_degree(even) == 4
    assert tail_degree(odd) == 5
    assert tail_degree(mixed) == 3


def test_rho_outside_range_rejected():
    dual, d = _dual("relu-normalized")
    errors = importlib.import_module("deepcond.errors")
    with pytest.raises(errors.DomainError):
        dual.dual_eval(d, 1.01)
    with pytest.raises(errors.DomainError):
        dual.dual_eval(d, float("nan"))
    # rounding noise just outside the interval is clamped
    assert dual.dual_eval(d, 1.0 + 1e-12) == pytest.approx(1.0, abs=1e-9)


def test_series_uncertainty_vanishes_at_zero():
    dual, d = _dual("relu-normalized")
    assert dual.series_uncertainty(d, 0.0) == 0.0
    assert dual.series_uncertainty(d, 1.0) == pytest.approx(d.tail_mass)


def test_compose_rows():
    dual, d = _dual("relu-normalized")
    rows = dual.compose(d, [0.5, -0.2], 3)
    assert rows.shape == (4, 2)
    assert np.allclose(rows[0], [0.5, -0.2])
    assert np.allclose(rows[1], dual.dual_eval(d, np.array([0.5, -0.2])))
    with pytest.raises(importlib.import_module("deepcond.errors").DomainError):
        dual.compose(d, 0.5, -1)


def test_centered_fixed_point_is_zero():
    dual, d = _dual("relu-normalized")
    fp = dual.fixed_point(d)
    assert fp.rho_bar == 0.0
    assert fp.derivative == pytest.approx(1.0 - d.mu, abs=1e-6)


def test_step_square_fixed_point():
    dual, d = _dual("step-square")
    fp = dual.fixed_point(d)
    assert fp.rho_bar == pytest.approx(0.79, abs=0.01)
    # closed form of the slope at the fixed point
    assert fp.derivative == pytest.approx(1.0 / (math.pi * math.sqrt(1.0 - fp.rho_bar ** 2)), abs=1e-6)
    assert fp.derivative < 1.0


def test_fixed_point_rejects_affine_and_unnormalized():
    dual = importlib.import_module("deepcond.dual")
    errors = importlib.import_module("deepcond.errors")
    with pytest.raises(errors.DomainError):
        dual.fixed_point(dual.dual_activation(dual.get_activation("identity")))
    with pytest.raises(errors.PreconditionError):
        dual.fixed_point(dual.dual_activation(dual.get_activation("relu")))


def test_unit_slope_edge_fixed_point_is_one():
    dual = importlib.import_module("deepcond.dual")
    d = dual.dual_activation(dual.hermite_combination([0.5, math.sqrt(0.5), 0.5]))
    fp = dual.fixed_point(d)
    assert fp.rho_bar == 1.0
    assert fp.derivative == pytest.approx(1.0, abs=1e-9)
    assert d.mu_tilde == pytest.approx(0.25, abs=1e-12)


def test_lemma_checks_hold_for_normalized_builtins():
    dual = importlib.import_module("deepcond.dual")
    for name in dual.NORMALIZED_BUILTINS:
        d = dual.dual_activation(dual.get_activation(name))
        for check in (dual.check_convexity, dual.check_oddness_bound,
                      dual.check_one_layer_contraction, dual.check_dot_ratio):
            result = check(d)
            assert result["ok"], (name, result["check"], result["issues"][:3])
            assert result["classification"] == "verified"


def test_contraction_check_reports_violation():
    dual = importlib.import_module("deepcond.dual")
    d = dual.dual_activation(dual.get_activation("relu-normalized"))
    inflated = dataclasses.replace(d, mu=0.9)
    result = dual.check_one_layer_contraction(inflated)
    assert not result["ok"]
    assert result["classification"] == "bound_violation"
    assert result["issues"]


def test_uncentered_one_layer_bounds():
    dual = importlib.import_module("deepcond.dual")
    for spec in (dual.get_activation("step-square"),
                 dual.hermite_combination([0.3, 0.8, math.sqrt(1 - 0.09 - 0.64)])):
        result = dual.check_uncentered_one_layer(dual.dual_activation(spec))
        assert result["ok"], result["issues"][:3]
