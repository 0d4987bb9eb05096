import importlib
import math

import numpy as np
import pytest


def _mods():
    return (
        importlib.import_module("deepcond.hermite.polynomials"),
        importlib.import_module("deepcond.hermite.quadrature"),
        importlib.import_module("deepcond.hermite.expansion"),
    )


def test_low_degree_closed_forms():
    poly, _, _ = _mods()
    x = np.linspace(-3.0, 3.0, 13)
    table = poly.hermite_table(3, x)
    assert np.allclose(table[0], 1.0)
    assert np.allclose(table[1], x)
    assert np.allclose(table[2], (x * x - 1.0) / math.sqrt(2.0), atol=1e-14)
    assert np.allclose(table[3], (x ** 3 - 3.0 * x) / math.sqrt(6.0), atol=1e-13)
    assert poly.hermite_value(2, 0.0) == pytest.approx(-1.0 / math.sqrt(2.0))
    assert np.allclose(poly.hermite_value(3, x), table[3], atol=1e-13)


def test_scaled_base_variance():
    poly, _, _ = _mods()
    assert poly.hermite_value(3, 2.0, gamma=4.0) == pytest.approx(poly.hermite_value(3, 1.0))


def test_orthonormal_under_gauss_hermite():
    poly, quad, _ = _mods()
    rule = quad.gauss_hermite_rule(64)
    table = poly.hermite_table(20, rule.nodes)
    gram = (table * rule.weights) @ table.T
    assert np.allclose(gram, np.eye(21), atol=1e-10)


def test_rule_moments_and_errors():
    _, quad, _ = _mods()
    for rule in (quad.gauss_hermite_rule(32), quad.piecewise_gaussian_rule((0.0,))):
        total, first, second = rule.moments()
        assert total == pytest.approx(1.0, abs=1e-12)
        assert first == pytest.approx(0.0, abs=1e-12)
        assert second == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(importlib.import_module("deepcond.errors").DomainError):
        quad.gauss_hermite_rule(0)
    with pytest.raises(importlib.import_module("deepcond.errors").DomainError):
        quad.gauss_hermite_rule(10_000)


def test_degree_and_gamma_validation():
    poly, _, _ = _mods()
    errors = importlib.import_module("deepcond.errors")
    with pytest.raises(errors.DomainError):
        poly.hermite_table(poly.MAX_DEGREE + 1, [0.0])
    with pytest.raises(errors.DomainError):
        poly.hermite_value(1, 0.5, gamma=0.0)


def test_relu_coefficients_through_composite_rule():
    _, _, expansion = _mods()
    relu = importlib.import_module("deepcond.dual.activations").get_activation("relu")
    exp = expansion.expand(relu, degree=10)
    a = exp.coefficients
    assert a[0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-10)
    assert a[1] == pytest.approx(0.5, abs=1e-10)
    # odd coefficients above one vanish for max(x, 0)
    assert abs(a[3]) < 1e-10 and abs(a[5]) < 1e-10
    assert exp.second_moment == pytest.approx(0.5, abs=1e-10)


def test_expand_rejects_low_order_rule():
    _, quad, expansion = _mods()
    errors = importlib.import_module("deepcond.errors")
    identity = importlib.import_module("deepcond.dual.activations").get_activation("identity")
    with pytest.raises(errors.DomainError):
        expansion.expand(identity, degree=40, rule=quad.gauss_hermite_rule(16))


def test_reconstruct_polynomial_activation():
    _, _, expansion = _mods()
    acts = importlib.import_module("deepcond.dual.activations")
    spec = acts.hermite_combination([0.2, -0.4, 0.7])
    exp = expansion.expand(spec, degree=6)
    x = np.linspace(-2.0, 2.0, 9)
    assert np.allclose(expansion.reconstruct(exp, x), spec.evaluate(x), atol=1e-10)


def test_pair_expectation_matches_relu_dual():
    _, quad, _ = _mods()
    relu = lambda x: np.maximum(x, 0.0)
    for rho in (-0.9, -0.3, 0.0, 0.4, 0.99):
        expected = (math.sqrt(1.0 - rho * rho) + (math.pi - math.acos(rho)) * rho) / (2.0 * math.pi)
        got = quad.pair_expectation(relu, relu, rho, kinks_f=(0.0,), kinks_g=(0.0,))
        assert got == pytest.approx(expected, abs=1e-8)


def test_generalized_orthogonality():
    poly, quad, _ = _mods()
    rng = np.random.default_rng(11)
    for _ in range(50):
        g1, g2 = rng.uniform(0.5, 2.0, size=2)
        g3 = rng.uniform(-0.95, 0.95) * math.sqrt(g1 * g2)
        cov = [[g1, g3], [g3, g2]]
        ratio = g3 / math.sqrt(g1 * g2)
        for i in range(9):
            for j in range(9):
                value = quad.tensor_expectation_2d(
                    lambda z1, z2: poly.hermite_value(i, z1, g1) * poly.hermite_value(j, z2, g2), cov
                )
                expected = ratio ** j if i == j else 0.0
                assert value == pytest.approx(expected, abs=1e-6)


def test_gaussian_expectation_with_and_without_kinks():
    _, quad, _ = _mods()
    assert quad.gaussian_expectation(lambda x: x * x, gamma=2.0) == pytest.approx(2.0, abs=1e-12)
    relu = lambda x: np.maximum(x, 0.0)
    assert quad.gaussian_expectation(relu, gamma=4.0, kinks=(0.0,)) == pytest.approx(
        2.0 / math.sqrt(2.0 * math.pi), abs=1e-8)
    with pytest.raises(importlib.import_module("deepcond.errors").DomainError):
        quad.gaussian_expectation(relu, gamma=0.0)
