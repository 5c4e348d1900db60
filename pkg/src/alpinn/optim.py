"""Descent-ascent training loop: Adam on the parameters, plain gradient
ascent on the multipliers, once each per epoch, full batch throughout.

Each epoch records the loss breakdown, per-group multiplier norms, and
the most recent evaluation error; a best-parameters snapshot is kept so
reported errors are best-over-training.  Training is deterministic for a
fixed seed (there is no data ordering to randomize).
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import balancers as bal
from .balancers import BalancerState
from .jets import seed_input
from .network import Architecture, Params, bind_params, forward, forward_values, init
from .problems import GridSpec, PdeProblem, interior_grid, sample
from .tape import Tape, reverse

__all__ = [
    "AdamState",
    "adam_step",
    "NonFiniteGradientError",
    "TrainOptions",
    "EpochRow",
    "TrainRecord",
    "EvalResult",
    "train",
    "evaluate",
]

log = logging.getLogger(__name__)


class NonFiniteGradientError(RuntimeError):
    """A gradient entry became NaN or infinite during a step."""


@dataclass
class AdamState:
    lr: float
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, lr: float, n: int) -> "AdamState":
        return cls(lr, np.zeros(n), np.zeros(n))


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Standard Adam update with bias correction; returns new parameters."""
    if params.shape != grads.shape:
        raise ValueError(f"shape mismatch: {params.shape} vs {grads.shape}")
    bad = ~np.isfinite(grads)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteGradientError(
            f"non-finite gradient {grads[i]} at parameter index {i}"
        )
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    mhat = state.m / (1.0 - state.beta1**state.t)
    vhat = state.v / (1.0 - state.beta2**state.t)
    return params - state.lr * mhat / (np.sqrt(vhat) + state.eps)


@dataclass
class TrainOptions:
    epochs: int
    lr: float = 1e-3
    seed: int = 0
    eval_n: int | None = None  # default 2500 (2D) / 3375 (3D)
    eval_every: int = 100
    patience: int | None = None
    init_scheme: str = "kaiming_uniform"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")


@dataclass
class EpochRow:
    epoch: int
    total_loss: float
    residual_loss: float
    constraint_losses: list[float]
    lambda_rms: list[float]
    rel_l2_error: float  # most recent evaluation (nan before the first)
    wall_ms: float


@dataclass
class EvalResult:
    rel_l2: float
    mse: float
    abs_err: list[np.ndarray]  # per head, on the eval grid
    points: np.ndarray


@dataclass
class TrainRecord:
    rows: list[EpochRow] = field(default_factory=list)
    best_epoch: int = -1
    best_error: float = float("inf")
    best_params: Params | None = None
    final_params: Params | None = None
    final_error: float = float("nan")
    diverged: bool = False
    divergence_message: str = ""
    epoch_ms: list[float] = field(default_factory=list)  # raw timings


def evaluate(params: Params, arch: Architecture, problem: PdeProblem,
             points: np.ndarray) -> EvalResult:
    """Relative L2 error, mean-squared error, and pointwise absolute error
    of the network against the exact solution on ``points`` (d, N)."""
    pred = forward_values(params, arch, points)
    exact = problem.exact(points)
    num = 0.0
    den = 0.0
    sq = 0.0
    count = 0
    abs_err = []
    for p, e in zip(pred, exact):
        diff = p - e
        abs_err.append(np.abs(diff))
        num += float(np.sum(diff * diff))
        den += float(np.sum(e * e))
        sq += float(np.sum(diff * diff))
        count += e.size
    if den == 0.0:
        raise ValueError("exact solution is identically zero on the eval grid")
    return EvalResult(float(np.sqrt(num / den)), sq / count, abs_err, points)


def _param_grads(adj, bound) -> np.ndarray:
    parts = []
    for wv, bv in bound.layers:
        for v in (wv, bv):
            g = adj[v.idx]
            parts.append(
                np.zeros_like(np.asarray(v.value)).ravel()
                if g is None
                else np.asarray(g, dtype=np.float64).ravel()
            )
    return np.concatenate(parts)


def _grad_stats(adj, bound) -> tuple[float, float]:
    """(max, mean) of |gradient| over all parameter entries."""
    g = np.abs(_param_grads(adj, bound))
    return float(g.max()), float(g.mean())


def default_eval_n(problem: PdeProblem) -> int:
    return 2500 if problem.input_dim == 2 else 3375


def train(
    problem: PdeProblem,
    arch: Architecture,
    state: BalancerState,
    grid: GridSpec,
    opts: TrainOptions,
    params: Params | None = None,
) -> TrainRecord:
    """Run the full descent-ascent loop and return the training record.

    Per epoch: forward over all collocation grids on a fresh tape, loss
    assembly for the state's strategy, one reverse sweep, one Adam step
    on the parameters, then the multiplier (or mask/weight) update, then
    the penalty-schedule advance.  Evaluation runs at epoch 1, every
    ``eval_every`` epochs, and at the last epoch.
    """
    if params is None:
        params = init(arch, opts.init_scheme, opts.seed)
    vec = params.flatten()
    adam = AdamState.fresh(opts.lr, vec.size)
    sampled = sample(problem, grid)
    eval_n = opts.eval_n if opts.eval_n is not None else default_eval_n(problem)
    eval_pts = interior_grid(problem.domain, eval_n)
    record = TrainRecord()
    last_err = float("nan")
    evals_since_best = 0
    strat = state.strategy

    for epoch in range(1, opts.epochs + 1):
        t0 = time.perf_counter()
        state.n = epoch
        tape = Tape()
        bound = bind_params(tape, params, arch)
        jets = seed_input(sampled.interior, tape)
        outs = forward(bound, arch, jets)
        residuals = problem.residual(outs, sampled.interior)
        c_residuals = []
        for gi, grp in enumerate(problem.constraints):
            pts, aux = sampled.groups[gi]
            og = forward(bound, arch, seed_input(pts, tape))
            c_residuals.append(grp.residual(og, pts, aux))
        lb = bal.assemble(state, residuals, c_residuals)
        if not np.isfinite(lb.total_value):
            record.diverged = True
            record.divergence_message = f"non-finite loss {lb.total_value} at epoch {epoch}"
            log.warning("%s", record.divergence_message)
            break

        if strat == "lra":
            adj_r = reverse(tape, lb.residual_term)
            max_r, _ = _grad_stats(adj_r, bound)
            mean_g = []
            for g, pt in enumerate(lb.penalty_terms):
                adj_g = reverse(tape, pt)
                _, m = _grad_stats(adj_g, bound)
                # The assembled term carries the current weight; the update
                # rule wants statistics of the unweighted constraint term.
                mean_g.append(m / float(state.lra_weights[g]))
            bal.lra_update(state, max_r, mean_g)

        adj = reverse(tape, lb.total)
        try:
            vec = adam_step(adam, vec, _param_grads(adj, bound))
        except NonFiniteGradientError as e:
            record.diverged = True
            record.divergence_message = f"{e} at epoch {epoch}"
            log.warning("%s", record.divergence_message)
            break
        params = Params.from_flat(arch, vec, params.rng_seed)

        if strat in ("lagrange", "augmented_lagrangian"):
            bal.ascend_lambda(state, [np.asarray(c.value) for c in c_residuals])
        elif strat == "soft_attention":
            res_vars, grp_vars = lb.sa_mask_vars
            res_grads = [np.asarray(adj[v.idx]) for v in res_vars]
            grp_grads = [np.asarray(adj[v.idx]) for v in grp_vars]
            bal.ascend_lambda(state, [], sa_grads=(res_grads, grp_grads))

        wall_ms = (time.perf_counter() - t0) * 1000.0
        record.epoch_ms.append(wall_ms)

        do_eval = epoch == 1 or epoch % opts.eval_every == 0 or epoch == opts.epochs
        if do_eval:
            last_err = evaluate(params, arch, problem, eval_pts).rel_l2
            if last_err < record.best_error:
                record.best_error = last_err
                record.best_epoch = epoch
                record.best_params = params.copy()
                evals_since_best = 0
            else:
                evals_since_best += 1

        record.rows.append(
            EpochRow(
                epoch,
                lb.total_value,
                lb.residual_value,
                lb.constraint_sq_means,
                bal.lambda_rms(state),
                last_err,
                wall_ms,
            )
        )
        if (
            do_eval
            and opts.patience is not None
            and evals_since_best >= opts.patience
        ):
            log.info("early stop at epoch %d (no improvement in %d evaluations)",
                     epoch, opts.patience)
            break

    record.final_params = params
    if not record.diverged and record.rows:
        record.final_error = evaluate(params, arch, problem, eval_pts).rel_l2
        if record.final_error < record.best_error:
            record.best_error = record.final_error
            record.best_epoch = record.rows[-1].epoch
            record.best_params = params.copy()
    return record
