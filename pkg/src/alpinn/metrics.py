"""Multi-trial aggregation and timing statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .optim import TrainRecord

__all__ = ["TrialSummary", "AggregateRow", "summarize", "aggregate", "epoch_timing"]


@dataclass
class TrialSummary:
    config_hash: str
    seed: int
    best_error: float
    final_error: float
    epochs_run: int
    mean_epoch_ms: float
    lambda_max: float
    lambda_final: float
    diverged: bool = False


@dataclass
class AggregateRow:
    strategy: str
    model: str
    n_trials: int
    mean_best_err: float
    std_best_err: float | None  # None when fewer than 2 usable trials
    mean_final_err: float
    diverged_count: int


def summarize(config_hash: str, seed: int, record: TrainRecord) -> TrialSummary:
    lam = [max(r.lambda_rms) if r.lambda_rms else 0.0 for r in record.rows]
    return TrialSummary(
        config_hash,
        seed,
        record.best_error,
        record.final_error,
        record.rows[-1].epoch if record.rows else 0,
        epoch_timing(record) if len(record.epoch_ms) >= 10 else float("nan"),
        max(lam) if lam else 0.0,
        lam[-1] if lam else 0.0,
        record.diverged,
    )


def aggregate(trials: list[TrialSummary], strategy: str = "", model: str = "") -> AggregateRow:
    """Mean and sample standard deviation of best errors over trials.

    Diverged trials are excluded from the error statistics but counted.
    All trials must share a config hash.
    """
    if not trials:
        raise ValueError("no trials to aggregate")
    h = trials[0].config_hash
    if any(t.config_hash != h for t in trials):
        raise ValueError("trials come from different configurations")
    ok = [t for t in trials if not t.diverged]
    n = len(ok)
    if n == 0:
        mean_best = std_best = mean_final = float("nan")
        std = None
    else:
        mean_best = sum(t.best_error for t in ok) / n
        mean_final = sum(t.final_error for t in ok) / n
        if n >= 2:
            std = math.sqrt(
                sum((t.best_error - mean_best) ** 2 for t in ok) / (n - 1)
            )
        else:
            std = None
    return AggregateRow(
        strategy,
        model,
        len(trials),
        mean_best,
        std,
        mean_final,
        sum(1 for t in trials if t.diverged),
    )


def epoch_timing(record: TrainRecord) -> float:
    """Mean ms per epoch, excluding the first 5 warm-up epochs."""
    times = record.epoch_ms
    if len(times) < 10:
        raise ValueError(f"need at least 10 timed epochs, got {len(times)}")
    body = times[5:]
    return sum(body) / len(body)
