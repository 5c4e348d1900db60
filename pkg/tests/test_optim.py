import numpy as np
import pytest

from alpinn import balancers as bal
from alpinn import problems as P
from alpinn.network import Architecture, forward_values, init
from alpinn.optim import (
    AdamState,
    EvalResult,
    NonFiniteGradientError,
    TrainOptions,
    adam_step,
    evaluate,
    train,
)


def make_setup(strategy="vanilla", **state_kw):
    problem = P.helmholtz()
    arch = Architecture(2, [8, 8])
    grid = P.GridSpec(n_r=64, n_b=40)
    sp = P.sample(problem, grid)
    sizes = [g[0].shape[1] for g in sp.groups]
    state = bal.make_state(strategy, sizes, n_residual=64, **state_kw)
    return problem, arch, state, grid


# -- Adam ------------------------------------------------------------------


def test_adam_zero_gradient_is_noop():
    s = AdamState.fresh(1e-3, 3)
    p = np.array([1.0, -2.0, 0.5])
    q = adam_step(s, p, np.zeros(3))
    assert np.array_equal(p, q)


def test_adam_first_step_closed_form():
    s = AdamState.fresh(1e-3, 1)
    q = adam_step(s, np.zeros(1), np.ones(1))
    assert abs(q[0] + 1e-3 / (1 + 1e-8)) < 1e-18


def test_adam_constant_gradient_second_step():
    s = AdamState.fresh(1e-3, 1)
    p = adam_step(s, np.zeros(1), np.ones(1))
    q = adam_step(s, p, np.ones(1))
    assert abs((q[0] - p[0]) + 1e-3 / (1 + 1e-8)) < 1e-15


def test_adam_step_counter_increments():
    s = AdamState.fresh(1e-3, 1)
    adam_step(s, np.zeros(1), np.ones(1))
    adam_step(s, np.zeros(1), np.ones(1))
    assert s.t == 2


def test_adam_rejects_nonfinite_gradient():
    s = AdamState.fresh(1e-3, 3)
    g = np.array([0.0, np.nan, 0.0])
    with pytest.raises(NonFiniteGradientError, match="index 1"):
        adam_step(s, np.zeros(3), g)
    with pytest.raises(ValueError):
        adam_step(s, np.zeros(2), np.zeros(3))


# -- evaluate --------------------------------------------------------------


class _StubProblem:
    """Exact solution defined relative to a fixed network's output."""

    def __init__(self, arch, params, scale):
        self.arch = arch
        self.params = params
        self.scale = scale
        self.domain = [(-1.0, 1.0), (-1.0, 1.0)]
        self.input_dim = 2

    def exact(self, pts):
        return [forward_values(self.params, self.arch, pts)[0] / self.scale]


def test_evaluate_identical_prediction_is_zero():
    arch = Architecture(2, [6])
    p = init(arch, seed=0)
    stub = _StubProblem(arch, p, 1.0)
    pts = P.interior_grid(stub.domain, 25)
    assert evaluate(p, arch, stub, pts).rel_l2 == 0.0


def test_evaluate_scaling_example():
    # u_nn = 1.1 u  =>  relative error 0.1
    arch = Architecture(2, [6])
    p = init(arch, seed=0)
    stub = _StubProblem(arch, p, 1.1)
    pts = P.interior_grid(stub.domain, 25)
    assert abs(evaluate(p, arch, stub, pts).rel_l2 - 0.1) < 1e-12


def test_evaluate_zero_prediction_is_one():
    problem = P.helmholtz()
    arch = Architecture(2, [6])
    p = init(arch, seed=0)
    for w, b in p.layers:
        w[:] = 0.0
    pts = P.interior_grid(problem.domain, 25)
    assert abs(evaluate(p, arch, problem, pts).rel_l2 - 1.0) < 1e-12


def test_evaluate_rejects_zero_exact_norm():
    arch = Architecture(2, [6])
    p = init(arch, seed=0)
    stub = _StubProblem(arch, p, 1.0)
    stub.exact = lambda pts: [np.zeros(pts.shape[1])]
    pts = P.interior_grid(stub.domain, 25)
    with pytest.raises(ValueError):
        evaluate(p, arch, stub, pts)


# -- train -----------------------------------------------------------------


def test_zero_learning_rate_keeps_params():
    problem, arch, state, grid = make_setup()
    p0 = init(arch, seed=0)
    rec = train(problem, arch, state, grid,
                TrainOptions(epochs=1, lr=1e-300, seed=0, eval_n=25))
    assert np.allclose(rec.final_params.flatten(), p0.flatten(), atol=1e-250)
    assert len(rec.rows) == 1


def test_fixed_seed_is_deterministic():
    rows = []
    for _ in range(2):
        problem, arch, state, grid = make_setup("augmented_lagrangian",
                                                beta=1.0, eta_lambda=0.1)
        rec = train(problem, arch, state, grid,
                    TrainOptions(epochs=20, seed=3, eval_n=25, eval_every=5))
        rows.append([(r.epoch, r.total_loss, r.rel_l2_error, tuple(r.lambda_rms))
                     for r in rec.rows])
    assert rows[0] == rows[1]


def test_vanilla_loss_decreases_over_100_epochs():
    problem, arch, state, grid = make_setup()
    rec = train(problem, arch, state, grid,
                TrainOptions(epochs=100, lr=1e-3, seed=1, eval_n=25))
    assert rec.rows[99].total_loss < rec.rows[0].total_loss


def test_best_error_is_min_of_evaluations():
    problem, arch, state, grid = make_setup()
    rec = train(problem, arch, state, grid,
                TrainOptions(epochs=50, seed=0, eval_n=25, eval_every=10))
    evals = {r.rel_l2_error for r in rec.rows if not np.isnan(r.rel_l2_error)}
    assert rec.best_error == min(evals)
    assert rec.best_params is not None


def test_lambda_rms_recorded_and_grows_from_zero():
    problem, arch, state, grid = make_setup("augmented_lagrangian",
                                            beta=1.0, eta_lambda=1.0)
    rec = train(problem, arch, state, grid,
                TrainOptions(epochs=10, seed=0, eval_n=25))
    assert rec.rows[0].lambda_rms[0] > 0.0  # ascent ran in epoch 1
    assert all(len(r.lambda_rms) == 1 for r in rec.rows)


def test_divergence_aborts_with_partial_record():
    problem, arch, state, grid = make_setup("penalty_schedule",
                                            beta_mode="linear",
                                            beta_slope=1e308)
    rec = train(problem, arch, state, grid,
                TrainOptions(epochs=50, seed=0, eval_n=25))
    assert rec.diverged
    assert len(rec.rows) < 50
    assert "epoch" in rec.divergence_message


def test_early_stopping_halts():
    problem, arch, state, grid = make_setup()
    rec = train(problem, arch, state, grid,
                TrainOptions(epochs=500, lr=1e-300, seed=0, eval_n=25,
                             eval_every=10, patience=2))
    assert rec.rows[-1].epoch < 500


def test_soft_attention_and_lra_train():
    for strat, kw in [("soft_attention", {"eta_lambda": 0.01}), ("lra", {})]:
        problem, arch, state, grid = make_setup(strat, **kw)
        rec = train(problem, arch, state, grid,
                    TrainOptions(epochs=15, seed=0, eval_n=25))
        assert len(rec.rows) == 15
        assert not rec.diverged
    assert not np.all(state.lra_weights == 1.0)  # lra weights moved


def test_train_options_validation():
    with pytest.raises(ValueError):
        TrainOptions(epochs=0)
    with pytest.raises(ValueError):
        TrainOptions(epochs=5, eval_every=0)
