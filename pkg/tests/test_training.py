import importlib

import numpy as np
import pytest


def _train():
    return importlib.import_module("deepcond.training")


def _errors():
    return importlib.import_module("deepcond.errors")


def test_gd_identity_design_converges_in_one_step():
    tr = _train()
    problem = tr.RegressionProblem(design=np.eye(3), labels=[0.5, -0.25, 1.0])
    run = tr.gd_top_layer(problem, T=3)
    assert run.step_size == pytest.approx(1.5)
    assert run.kappa == pytest.approx(1.0)
    assert run.losses[1] == pytest.approx(0.0, abs=1e-24)
    assert run.ok


def test_gd_zero_labels_stay_at_zero_loss():
    tr = _train()
    run = tr.gd_top_layer(tr.RegressionProblem(design=np.eye(2), labels=[0.0, 0.0]), T=5)
    assert run.losses == [0.0] * 6


def test_gd_respects_rate_envelope_on_ill_conditioned_design():
    tr = _train()
    problem = tr.RegressionProblem(design=np.diag([1.0, 10.0]), labels=[0.5, -0.5])
    run = tr.gd_top_layer(problem, T=2000)
    assert run.kappa == pytest.approx(100.0)
    assert run.ok, run.issues[:3]
    assert run.losses[-1] < 1e-12
    rows = run.rows()
    assert len(rows) == 2001
    assert len(rows[0]) == len(tr.TRAIN_COLUMNS)


def test_gd_rejects_singular_or_underparameterized_designs():
    tr = _train()
    errors = _errors()
    with pytest.raises(errors.DomainError):
        tr.gd_top_layer(tr.RegressionProblem(design=[[1.0, 0.0], [1.0, 0.0]], labels=[0.1, 0.2]))
    with pytest.raises(errors.DomainError):
        tr.gd_top_layer(tr.RegressionProblem(design=np.ones((3, 2)), labels=[0.0, 0.0, 0.0]))
    with pytest.raises(errors.DomainError):
        tr.RegressionProblem(design=np.eye(2), labels=[1.5, 0.0])
    with pytest.raises(errors.DomainError):
        tr.RegressionProblem(design=np.eye(2), labels=[0.0])


def test_gd_on_network_features():
    tr = _train()
    mc = importlib.import_module("deepcond.montecarlo")
    dual = importlib.import_module("deepcond.dual")
    cond = importlib.import_module("deepcond.conditioning")
    x = cond.synthetic_unit_inputs(3, 0.3, 0)
    cfg = mc.NetworkConfig(input_dim=x.shape[1], width=64, depth=2,
                           activation=dual.get_activation("relu-normalized"), seed=1)
    problem = tr.top_layer_problem(mc.sample_network(cfg), x, [1.0, -1.0, 0.5])
    assert problem.p == 64
    run = tr.gd_top_layer(problem, T=200)
    assert run.ok, run.issues[:3]
    assert run.losses[-1] < run.losses[0]


def test_kernel_problem_factors_the_gram():
    tr = _train()
    cond = importlib.import_module("deepcond.conditioning")
    K = cond.GramMatrix.from_entries([[1.0, 0.5], [0.5, 1.0]])
    problem = tr.kernel_problem(K, [0.2, 0.4])
    assert np.allclose(problem.design @ problem.design.T, K.entries)
    with pytest.raises(_errors().DomainError):
        tr.kernel_problem(cond.GramMatrix.from_entries([[1.0, 2.0], [2.0, 1.0]]), [0.0, 0.0])


def test_sgd_reaches_target_in_expectation():
    tr = _train()
    rng = np.random.default_rng(11)
    a = rng.standard_normal((4, 8))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    problem = tr.RegressionProblem(design=a, labels=[0.9, -0.4, 0.3, -0.8])
    eps = 1e-3
    at_steps = []
    for s in range(20):
        run = tr.sgd_top_layer(problem, seed=s, eps=eps)
        steps = run.details["theorem_steps"]
        assert run.iterations == steps
        assert steps % run.steps_per_point == 0
        loss = run.losses[steps // run.steps_per_point]
        assert loss == run.details["loss_at_theorem_steps"]
        at_steps.append(loss)
    mean = float(np.mean(at_steps))
    se = float(np.std(at_steps, ddof=1) / np.sqrt(len(at_steps)))
    assert mean <= eps + 4.0 * se


def test_sgd_step_and_epoch_schedule():
    tr = _train()
    problem = tr.RegressionProblem(design=[[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]], labels=[1.0, -1.0])
    half = tr.sgd_top_layer(problem, seed=0, eps=0.5)
    quarter = tr.sgd_top_layer(problem, seed=0, eps=0.25)
    assert half.step_size == pytest.approx(0.25)
    assert half.details["epoch_length"] == 16
    assert half.details["epochs"] == 1
    assert quarter.iterations - half.iterations == half.details["epoch_length"]
    assert [row[0] for row in quarter.rows()] == [0, 16, 32]
    with pytest.raises(_errors().DomainError):
        tr.sgd_top_layer(problem, seed=0, eps=0.0)


def test_sgd_single_sample():
    tr = _train()
    run = tr.sgd_top_layer(tr.RegressionProblem(design=[[1.0, 0.0]], labels=[0.5]), seed=3, eps=1e-4)
    assert run.details["epoch_length"] == 8
    assert run.losses[-1] <= run.losses[0]


def test_min_norm_interpolator():
    tr = _train()
    y = np.array([0.3, -0.7, 0.1])
    fit = tr.min_norm_interpolator(np.eye(3), y)
    assert np.allclose(fit.dual_weights, y)
    assert fit.norm_squared == pytest.approx(float(y @ y))
    two = tr.min_norm_interpolator([[1.0, 0.5], [0.5, 1.0]], [1.0, 0.0])
    assert np.allclose(two.dual_weights, [4.0 / 3.0, -2.0 / 3.0])
    assert two.predictor_norm == pytest.approx(np.sqrt(4.0 / 3.0))
    assert two.max_residual <= 1e-12


def test_min_norm_interpolator_failures():
    tr = _train()
    errors = _errors()
    with pytest.raises(errors.DomainError):
        tr.min_norm_interpolator([[1.0, 1.0], [1.0, 1.0]], [0.0, 1.0])
    with pytest.raises(errors.NumericalError):
        tr.min_norm_interpolator(np.diag([2e-10, 1e3]), [0.0, 1.0])
    with pytest.raises(errors.DomainError):
        tr.min_norm_interpolator(np.eye(2), [0.0, 1.0, 0.5])


def test_generate_data():
    tr = _train()
    rng = np.random.default_rng(0)
    target = np.array([1.0, 0.0, 0.0])
    x, y = tr.generate_data("linear", 10, 3, rng, target)
    assert np.allclose(y, x[:, 0])
    assert np.all(np.abs(tr.generate_data("noise", 10, 3, rng)[1]) <= 1.0)
    with pytest.raises(_errors().DomainError):
        tr.generate_data("spiral", 10, 3, rng)
    with pytest.raises(_errors().DomainError):
        tr.generate_data("linear", 10, 3, rng)


def test_excess_risk_zero_labels():
    tr = _train()
    dual = importlib.import_module("deepcond.dual")
    risk = tr.excess_risk_estimate(dual.get_activation("relu-normalized"), L=3, n=16, n_test=200, data_gen="zeros")
    assert risk.excess_risk == 0.0
    assert risk.test_risk == 0.0
    assert risk.depth == 3
    assert set(risk.as_dict()) == set(tr.RISK_COLUMNS)


def test_excess_risk_default_depth_and_preconditions():
    tr = _train()
    dual = importlib.import_module("deepcond.dual")
    cond = importlib.import_module("deepcond.conditioning")
    spec = dual.get_activation("relu-normalized")
    risk = tr.excess_risk_estimate(spec, n=16, n_test=200, seed=2)
    d = dual.dual_activation(spec)
    assert risk.depth == cond.depth_thresholds(d.mu, risk.delta, 16).l1
    assert risk.max_residual <= 1e-8
    assert risk.test_risk >= 0.0
    with pytest.raises(_errors().PreconditionError):
        tr.excess_risk_estimate(dual.get_activation("relu"), L=2, n=8, n_test=20)


def test_excess_risk_shrinks_with_sample_size():
    tr = _train()
    dual = importlib.import_module("deepcond.dual")
    cond = importlib.import_module("deepcond.conditioning")
    spec = dual.get_activation("relu-normalized")
    mu = dual.dual_activation(spec).mu
    risks = [tr.excess_risk_estimate(spec, n=n, n_test=2000, data_gen="linear", seed=0) for n in (64, 128, 256)]
    for risk in risks:
        assert risk.depth == cond.depth_thresholds(mu, risk.delta, risk.n).l1
        assert risk.max_residual <= 1e-8
    for prev, nxt in zip(risks, risks[1:]):
        assert nxt.excess_risk <= prev.excess_risk + 2.0 * np.hypot(prev.std_error, nxt.std_error)


def test_depth_helps_optimization():
    tr = _train()
    dual = importlib.import_module("deepcond.dual")
    out = tr.depth_helps_optimization(dual.get_activation("relu-normalized"), 6, 0.1, 0)
    assert out["ok"], out["depths"]
    shallow, deep = out["depths"]
    assert deep["L"] == out["L1"]
    assert deep["kappa"] < shallow["kappa"]
    with pytest.raises(_errors().DomainError):
        tr.depth_helps_optimization(dual.get_activation("identity"), 4, 0.2, 0)
