"""Training-objective assembly for the constraint-handling strategies.

Six strategies share one assembly routine:

* ``vanilla``               -- residual mean plus unweighted constraint means.
* ``penalty_schedule``      -- constraint means scaled by a growing (or
                               constant) penalty coefficient beta_n.
* ``lagrange``              -- linear per-point multiplier terms only.
* ``augmented_lagrangian``  -- quadratic penalty plus multiplier terms; the
                               multipliers are ascended between descent steps.
* ``soft_attention``        -- trainable per-point masks entering squared,
                               on interior and constraint points alike.
* ``lra``                   -- per-group scalar weights driven by gradient
                               statistics with an exponential moving average.

Multipliers enter the tape as constants except under soft attention, where
the masks are leaves so the tape provides their ascent direction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .tape import Var

__all__ = [
    "STRATEGIES",
    "canonical_strategy",
    "BalancerState",
    "LossBreakdown",
    "make_state",
    "assemble",
    "ascend_lambda",
    "lra_update",
    "beta_schedule",
    "lambda_rms",
]

log = logging.getLogger(__name__)

STRATEGIES = (
    "vanilla",
    "penalty_schedule",
    "lagrange",
    "augmented_lagrangian",
    "soft_attention",
    "lra",
)

_ALIASES = {
    "penalty": "penalty_schedule",
    "al": "augmented_lagrangian",
    "sa": "soft_attention",
}


def canonical_strategy(name: str) -> str:
    key = name.lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")
    return key


@dataclass
class BalancerState:
    strategy: str
    lambdas: list[np.ndarray]  # one vector per constraint group
    sa_residual_masks: list[np.ndarray]  # soft attention only, one per residual
    beta: float = 1.0
    beta_mode: str = "constant"  # constant | linear
    beta_slope: float = 10.0
    eta_lambda: float = 1.0
    lra_weights: np.ndarray | None = None
    lra_alpha: float = 0.1
    n: int = 1  # step counter, advanced by the training loop
    # Optional measure factors (|domain| per term); all ones unless the
    # measure_weights config flag is set.
    residual_weight: float = 1.0
    group_weights: np.ndarray | None = None


@dataclass
class LossBreakdown:
    total: Var
    residual_term: Var
    penalty_terms: list[Var | None]
    multiplier_terms: list[Var | None]
    total_value: float
    residual_value: float
    constraint_sq_means: list[float]  # plain mean c^2 per group, for logging
    sa_mask_vars: tuple[list[Var], list[Var]] | None = None  # (residual, groups)


def make_state(
    strategy: str,
    group_sizes: list[int],
    n_residual: int = 0,
    n_residual_components: int = 1,
    beta: float = 1.0,
    beta_mode: str = "constant",
    beta_slope: float = 10.0,
    eta_lambda: float = 1.0,
    lra_alpha: float = 0.1,
) -> BalancerState:
    strategy = canonical_strategy(strategy)
    if strategy == "soft_attention":
        lambdas = [np.ones(n) for n in group_sizes]
        masks = [np.ones(n_residual) for _ in range(n_residual_components)]
    else:
        lambdas = [np.zeros(n) for n in group_sizes]
        masks = []
    if beta_mode not in ("constant", "linear"):
        raise ValueError(f"unknown beta mode {beta_mode!r}")
    lra_weights = np.ones(len(group_sizes)) if strategy == "lra" else None
    return BalancerState(
        strategy,
        lambdas,
        masks,
        beta=beta,
        beta_mode=beta_mode,
        beta_slope=beta_slope,
        eta_lambda=eta_lambda,
        lra_weights=lra_weights,
        lra_alpha=lra_alpha,
    )


def beta_schedule(state: BalancerState, n: int | None = None) -> float:
    """Penalty coefficient at step ``n`` (defaults to the state's counter)."""
    n = state.n if n is None else n
    if n < 1:
        raise ValueError(f"step counter must be >= 1, got {n}")
    if state.beta_mode == "linear":
        return state.beta_slope * n
    return state.beta


def _mean_sq(c: Var) -> Var:
    from . import tape as tp

    return tp.square(c).mean()


def assemble(
    state: BalancerState,
    residuals: list[Var],
    constraint_residuals: list[Var],
) -> LossBreakdown:
    """Build the scalar training objective on the residuals' tape."""
    if len(constraint_residuals) != len(state.lambdas):
        raise ValueError(
            f"{len(constraint_residuals)} constraint groups but "
            f"{len(state.lambdas)} multiplier vectors"
        )
    for g, (c, lam) in enumerate(zip(constraint_residuals, state.lambdas)):
        n = c.value.size if isinstance(c.value, np.ndarray) else 1
        if n != lam.size:
            raise ValueError(
                f"group {g}: {n} constraint values but {lam.size} multipliers"
            )
    strat = state.strategy
    tape = residuals[0].tape
    sa_res_vars: list[Var] = []
    sa_grp_vars: list[Var] = []

    # Interior residual term.
    if strat == "soft_attention":
        parts = []
        for r, m in zip(residuals, state.sa_residual_masks):
            mv = tape.leaf(m)
            sa_res_vars.append(mv)
            parts.append(_mean_sq(r * mv))
        residual_term = parts[0]
        for p in parts[1:]:
            residual_term = residual_term + p
    else:
        residual_term = _mean_sq(residuals[0])
        for r in residuals[1:]:
            residual_term = residual_term + _mean_sq(r)
    if state.residual_weight != 1.0:
        residual_term = residual_term * state.residual_weight

    beta_n = beta_schedule(state)
    quad_w: list[float | None] = []
    linear = strat in ("lagrange", "augmented_lagrangian")
    for g in range(len(constraint_residuals)):
        if strat == "vanilla":
            quad_w.append(1.0)
        elif strat == "penalty_schedule":
            quad_w.append(beta_n)
        elif strat == "lagrange":
            quad_w.append(None)
        elif strat == "augmented_lagrangian":
            quad_w.append(state.beta if state.beta != 0.0 else None)
        elif strat == "soft_attention":
            quad_w.append(1.0)
        else:  # lra
            quad_w.append(float(state.lra_weights[g]))

    penalty_terms: list[Var | None] = []
    multiplier_terms: list[Var | None] = []
    total = residual_term
    constraint_sq_means = []
    for g, c in enumerate(constraint_residuals):
        gw = 1.0 if state.group_weights is None else float(state.group_weights[g])
        cv = np.asarray(c.value)
        constraint_sq_means.append(float(np.mean(cv * cv)))
        pterm = None
        if quad_w[g] is not None:
            if strat == "soft_attention":
                mv = tape.leaf(state.lambdas[g])
                sa_grp_vars.append(mv)
                pterm = _mean_sq(c * mv)
            else:
                pterm = _mean_sq(c)
                if quad_w[g] != 1.0:
                    pterm = pterm * quad_w[g]
            if gw != 1.0:
                pterm = pterm * gw
            total = total + pterm
        penalty_terms.append(pterm)
        mterm = None
        if linear:
            mterm = (c * state.lambdas[g]).mean()
            if gw != 1.0:
                mterm = mterm * gw
            total = total + mterm
        multiplier_terms.append(mterm)

    return LossBreakdown(
        total,
        residual_term,
        penalty_terms,
        multiplier_terms,
        float(total.value),
        float(residual_term.value),
        constraint_sq_means,
        (sa_res_vars, sa_grp_vars) if strat == "soft_attention" else None,
    )


def ascend_lambda(
    state: BalancerState,
    constraint_values: list[np.ndarray],
    sa_grads: tuple[list[np.ndarray], list[np.ndarray]] | None = None,
) -> BalancerState:
    """One gradient-ascent step on the multipliers (or attention masks).

    For the multiplier strategies the exact partial of the assembled
    objective with respect to lambda_j is c_j / N_g, so the update is
    closed form.  Soft attention needs the tape gradients of the masks,
    passed in ``sa_grads`` as (residual mask grads, group mask grads).
    """
    strat = state.strategy
    if strat in ("lagrange", "augmented_lagrangian"):
        for lam, c in zip(state.lambdas, constraint_values):
            c = np.asarray(c, dtype=np.float64)
            if c.size != lam.size:
                raise ValueError(f"{c.size} constraint values for {lam.size} multipliers")
            lam += state.eta_lambda * c / c.size
        return state
    if strat == "soft_attention":
        if sa_grads is None:
            raise ValueError("soft_attention ascent needs mask gradients from the tape")
        res_grads, grp_grads = sa_grads
        for m, gr in zip(state.sa_residual_masks, res_grads):
            m += state.eta_lambda * gr
        for lam, gr in zip(state.lambdas, grp_grads):
            lam += state.eta_lambda * gr
        return state
    raise ValueError(f"ascend_lambda is undefined for strategy {strat!r}")


def lra_update(
    state: BalancerState,
    max_residual_grad: float,
    mean_group_grads: list[float],
) -> BalancerState:
    """Exponential-moving-average update of the per-group weights.

    Targets are w_hat_g = max |grad residual term| / mean |grad group term|;
    groups whose mean gradient is zero keep their weight (with a warning).
    """
    if state.strategy != "lra":
        raise ValueError(f"lra_update is undefined for strategy {state.strategy!r}")
    a = state.lra_alpha
    for g, mg in enumerate(mean_group_grads):
        if mg <= 0.0:
            log.warning("group %d has zero mean gradient; weight left at %g",
                        g, state.lra_weights[g])
            continue
        target = max_residual_grad / mg
        state.lra_weights[g] = (1.0 - a) * state.lra_weights[g] + a * target
    return state


def lambda_rms(state: BalancerState) -> list[float]:
    """Root-mean-square multiplier (or mask) magnitude per group."""
    return [float(np.sqrt(np.mean(lam * lam))) for lam in state.lambdas]
