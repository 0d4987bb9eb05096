import importlib

import numpy as np
import pytest


def _mods():
    return importlib.import_module("deepcond.conditioning"), importlib.import_module("deepcond.dual")


def test_gram_validation():
    cond, _ = _mods()
    errors = importlib.import_module("deepcond.errors")
    with pytest.raises(errors.DomainError):
        cond.GramMatrix.from_entries([[1.0, 0.2], [0.3, 1.0]])
    with pytest.raises(errors.DomainError):
        cond.GramMatrix.from_entries([[1.0, 0.2, 0.1]])
    with pytest.raises(errors.DomainError):
        cond.GramMatrix.from_entries([[2.0, 0.0], [0.0, 1.0]], unit_diagonal=True)
    assert cond.GramMatrix.from_entries([[1.0, 0.5], [0.5, 1.0]]).unit_diagonal
    assert not cond.GramMatrix.from_entries([[2.0, 0.5], [0.5, 1.0]]).unit_diagonal


def test_identity_kernel_is_a_fixed_point():
    cond, dual = _mods()
    d = dual.dual_activation(dual.get_activation("relu-normalized"))
    K = cond.GramMatrix.from_entries(np.eye(4))
    out = cond.propagate_kernel(K, d, 10)
    assert np.allclose(out.entries, np.eye(4), atol=1e-12)


def test_propagation_matches_scalar_composition():
    cond, dual = _mods()
    d = dual.dual_activation(dual.get_activation("relu-normalized"))
    K = cond.gram_from_inputs(cond.synthetic_unit_inputs(5, 0.1, 3))
    trace = cond.propagate_trace(K, d, 6)
    assert len(trace) == 7
    rho = K.off_diagonal()
    composed = dual.compose(d, rho, 6)
    for depth, k in enumerate(trace):
        assert np.allclose(k.off_diagonal(), composed[depth], atol=1e-12)
    assert np.allclose(cond.compose_values(d, rho, 6), composed[-1], atol=1e-12)
    assert np.allclose(cond.compose_values(d, rho, 0), rho)
    with pytest.raises(importlib.import_module("deepcond.errors").DomainError):
        cond.compose_values(d, rho, -1)


def test_propagation_needs_square_normalized_dual():
    cond, dual = _mods()
    errors = importlib.import_module("deepcond.errors")
    K = cond.GramMatrix.from_entries(np.eye(2))
    with pytest.raises(errors.DomainError):
        cond.propagate_kernel(K, dual.dual_activation(dual.get_activation("relu")), 1)


def test_ntk_diagonal_and_identity_activation():
    cond, dual = _mods()
    ident = dual.dual_activation(dual.get_activation("identity"))
    assert cond.ntk_diagonal(ident, 6) == 7.0
    K = cond.GramMatrix.from_entries([[1.0, 0.3], [0.3, 1.0]])
    theta = cond.ntk_matrix(K, ident, 6)
    assert np.allclose(theta.entries, [[7.0, 2.1], [2.1, 7.0]])
    relu = dual.dual_activation(dual.get_activation("relu-normalized"))
    slope = dual.dual_derivative_eval(relu, 1.0)
    assert cond.ntk_diagonal(relu, 3) == pytest.approx((slope ** 4 - 1.0) / (slope - 1.0))


def test_ntk_diverges_for_unbounded_slope():
    cond, dual = _mods()
    errors = importlib.import_module("deepcond.errors")
    with pytest.raises(errors.DomainError):
        cond.ntk_diagonal(dual.dual_activation(dual.get_activation("sign")), 2)


def test_ntk_series_matches_matrix():
    cond, dual = _mods()
    d = dual.dual_activation(dual.get_activation("relu-normalized"))
    K = cond.gram_from_inputs(cond.synthetic_unit_inputs(4, 0.2, 1))
    theta = cond.ntk_matrix(K, d, 5)
    series = cond.NtkSeries(d, 5)
    assert np.allclose(series(K.off_diagonal()), theta.off_diagonal(), atol=1e-12)
    assert series(1.0) == pytest.approx(cond.ntk_diagonal(d, 5), rel=1e-12)


def test_ntk_series_coefficients_for_square_dual():
    cond, dual = _mods()
    d = dual.dual_activation(dual.get_activation("hermite2"))
    coeffs = cond.NtkSeries(d, 1).coefficients(degree=4)
    assert np.allclose(coeffs, [0.0, 0.0, 3.0, 0.0, 0.0], atol=1e-10)


def test_eigenvalue_lower_bound_on_random_kernels():
    cond, dual = _mods()
    d = dual.dual_activation(dual.get_activation("relu-normalized"))
    ntk = cond.NtkSeries(d, 3)
    for seed in range(20):
        K = cond.random_unit_diagonal_psd(6, 0.3, seed)
        assert cond.eigen_lb_check(d, K, 0.3)["holds"]
        assert cond.eigen_lb_check(ntk, K, 0.3)["holds"]


def test_eigenvalue_check_rejects_weak_kernel():
    cond, dual = _mods()
    errors = importlib.import_module("deepcond.errors")
    d = dual.dual_activation(dual.get_activation("relu-normalized"))
    K = cond.GramMatrix.from_entries([[1.0, 0.9], [0.9, 1.0]])
    with pytest.raises(errors.DomainError):
        cond.eigen_lb_check(d, K, 0.5)


def test_separation_and_spectrum():
    cond, _ = _mods()
    K = cond.GramMatrix.from_entries([[1.0, 0.3, -0.6], [0.3, 1.0, 0.1], [-0.6, 0.1, 1.0]])
    delta, pair = cond.separation_delta(K)
    assert delta == pytest.approx(0.4)
    assert pair == (0, 2)
    assert cond.separation_delta(cond.GramMatrix.from_entries([[1.0]])) == (1.0, None)
    # a 0.5-separated pair can still be singular as a triple
    flat = cond.GramMatrix.from_entries([[1.0, 0.5, -0.5], [0.5, 1.0, 0.5], [-0.5, 0.5, 1.0]])
    assert cond.separation_delta(flat)[0] == pytest.approx(0.5)
    assert cond.nonsingularity_delta(flat) == pytest.approx(0.0, abs=1e-12)
    eig = cond.spectrum(np.diag([0.5, 2.0]))
    assert eig.kappa == pytest.approx(4.0)
    singular = cond.spectrum(np.diag([0.0, 2.0]))
    assert singular.degenerate
    assert np.isnan(singular.kappa)


def test_gershgorin_and_hadamard():
    cond, _ = _mods()
    K = cond.random_unit_diagonal_psd(5, 0.2, 7)
    assert cond.gershgorin_check(K)["ok"]
    A = K.entries
    B = cond.random_unit_diagonal_psd(5, 0.5, 8).entries
    assert cond.hadamard_psd_check(A, B)["ok"]
    with pytest.raises(importlib.import_module("deepcond.errors").DomainError):
        cond.hadamard_psd_check(np.diag([1.0, -1.0]), np.eye(2))


def test_synthetic_inputs_have_prescribed_separation():
    cond, _ = _mods()
    for delta in (0.05, 0.3, 1.0):
        x = cond.synthetic_unit_inputs(8, delta, 4)
        assert x.shape == (8, 11)
        K = cond.gram_from_inputs(x)
        assert K.unit_diagonal
        assert cond.separation_delta(K)[0] >= delta - 1e-12
        assert cond.spectrum(K).lambda_min >= delta - 1e-12
    assert np.array_equal(cond.synthetic_unit_inputs(3, 0.2, 9), cond.synthetic_unit_inputs(3, 0.2, 9))
