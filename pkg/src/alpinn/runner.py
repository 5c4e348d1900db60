"""Experiment orchestration: trials, CSV persistence, plots, benchmarks.

Trials within a run differ only by seed and are embarrassingly parallel;
workers return records to the coordinator, which does all file writes in
seed order so artifacts are byte-identical regardless of job count.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import balancers as bal
from . import svgplot
from .config import ExperimentConfig, architecture_for, config_hash, serialize
from .metrics import AggregateRow, TrialSummary, aggregate, summarize
from .network import save_params
from .optim import TrainOptions, TrainRecord, evaluate, train
from .problems import GridSpec, PdeProblem, by_name, interior_grid, sample

__all__ = ["RunArtifacts", "run", "run_trial", "sweep", "bench", "default_jobs"]

log = logging.getLogger(__name__)

POOR_FIT_THRESHOLD = 0.5


@dataclass
class RunArtifacts:
    outdir: Path
    trajectory_csvs: list[Path]
    aggregate_csv: Path
    heatmap_csv: Path | None
    heatmap_svg: Path | None
    model_bin: Path | None
    row: AggregateRow
    all_diverged: bool


def default_jobs() -> int:
    env = os.environ.get("ALPINN_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer ALPINN_JOBS=%r", env)
    return 1


def _fnum(v: float) -> str:
    return f"{v:.17g}"


def build_problem(cfg: ExperimentConfig) -> PdeProblem:
    return by_name(cfg.problem)


def build_state(cfg: ExperimentConfig, problem: PdeProblem, grid: GridSpec) -> bal.BalancerState:
    sp = sample(problem, grid)
    sizes = [pts.shape[1] for pts, _ in sp.groups]
    beta_mode = "linear" if cfg.strategy == "penalty_schedule" and cfg.beta_mode != "constant" else cfg.beta_mode
    state = bal.make_state(
        cfg.strategy,
        sizes,
        n_residual=sp.interior.shape[1],
        n_residual_components=3 if problem.name == "navier_stokes" else 1,
        beta=cfg.beta,
        beta_mode=beta_mode,
        beta_slope=cfg.beta_slope,
        eta_lambda=cfg.eta_lambda,
    )
    if cfg.measure_weights:
        state.residual_weight = math.prod(hi - lo for lo, hi in problem.domain)
        state.group_weights = np.ones(len(sizes))  # unit measures per data set
    return state


def _grid(cfg: ExperimentConfig) -> GridSpec:
    return GridSpec(cfg.n_r, cfg.n_b, cfg.n_i)


def run_trial(cfg: ExperimentConfig, seed: int) -> tuple[TrialSummary, TrainRecord]:
    problem = build_problem(cfg)
    arch = architecture_for(cfg, problem.input_dim)
    grid = _grid(cfg)
    state = build_state(cfg, problem, grid)
    opts = TrainOptions(
        epochs=cfg.epochs,
        lr=cfg.eta_theta,
        seed=seed,
        eval_n=cfg.eval_n or None,
        eval_every=cfg.eval_every,
        patience=cfg.patience or None,
        init_scheme=cfg.init,
    )
    record = train(problem, arch, state, grid, opts)
    return summarize(config_hash(cfg), seed, record), record


def _run_trials(cfg: ExperimentConfig, jobs: int) -> list[tuple[TrialSummary, TrainRecord]]:
    seeds = [cfg.seed + k for k in range(cfg.n_trials)]
    if jobs <= 1 or cfg.n_trials == 1:
        return [run_trial(cfg, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=min(jobs, len(seeds))) as pool:
        return list(pool.map(run_trial, [cfg] * len(seeds), seeds))


def _write_trajectory(path: Path, cfg: ExperimentConfig, record: TrainRecord,
                      n_groups: int) -> None:
    cols = ["epoch", "total_loss", "residual_loss"]
    cols += [f"constraint_loss_g{k}" for k in range(n_groups)]
    cols += [f"lambda_l2_g{k}" for k in range(n_groups)]
    cols += ["rel_l2_error", "wall_ms"]
    lines = [",".join(cols)]
    for r in record.rows:
        vals = [str(r.epoch), _fnum(r.total_loss), _fnum(r.residual_loss)]
        vals += [_fnum(v) for v in r.constraint_losses]
        vals += [_fnum(v) for v in r.lambda_rms]
        vals += [_fnum(r.rel_l2_error), _fnum(r.wall_ms if cfg.timing else 0.0)]
        lines.append(",".join(vals))
    path.write_text("\n".join(lines) + "\n")


def _write_aggregate(path: Path, cfg: ExperimentConfig, row: AggregateRow) -> None:
    header = (
        "problem,model,strategy,n_trials,mean_best_err,std_best_err,"
        "mean_final_err,diverged_count,poor_fit"
    )
    poor = "true" if (math.isnan(row.mean_best_err) or row.mean_best_err > POOR_FIT_THRESHOLD) else "false"
    std = _fnum(row.std_best_err) if row.std_best_err is not None else ""
    line = ",".join(
        [
            cfg.problem,
            cfg.model,
            cfg.strategy,
            str(row.n_trials),
            _fnum(row.mean_best_err),
            std,
            _fnum(row.mean_final_err),
            str(row.diverged_count),
            poor,
        ]
    )
    path.write_text(header + "\n" + line + "\n")


def _write_heatmap(outdir: Path, cfg: ExperimentConfig, problem: PdeProblem,
                   record: TrainRecord) -> tuple[Path, Path]:
    params = record.best_params or record.final_params
    arch = architecture_for(cfg, problem.input_dim)
    n = cfg.eval_n or (2500 if problem.input_dim == 2 else 3375)
    pts = interior_grid(problem.domain, n)
    res = evaluate(params, arch, problem, pts)
    err = res.abs_err[0]
    if problem.input_dim == 2:
        names = ("x", "y") if problem.name == "helmholtz" else ("t", "x")
        cols = (pts[0], pts[1], err)
    else:
        # Reduce the 3D grid to the final time slice of the first field.
        tmax = pts[0].max()
        m = pts[0] == tmax
        names = ("x", "y")
        cols = (pts[1][m], pts[2][m], err[m])
    csv_path = outdir / "heatmap.csv"
    lines = [",".join(names) + ",abs_err"]
    for a, b, v in zip(*cols):
        lines.append(f"{_fnum(a)},{_fnum(b)},{_fnum(v)}")
    csv_path.write_text("\n".join(lines) + "\n")
    svg_path = outdir / "heatmap.svg"
    svg_path.write_text(
        svgplot.heatmap(list(cols[0]), list(cols[1]), list(cols[2]), *names,
                        title="pointwise absolute error")
    )
    return csv_path, svg_path


def run(cfg: ExperimentConfig, jobs: int | None = None) -> RunArtifacts:
    """Train ``n_trials`` seeds, persist trajectories, aggregate, and the
    best trial's error heatmap and parameters."""
    jobs = default_jobs() if jobs is None else jobs
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.txt").write_text(serialize(cfg))
    results = _run_trials(cfg, jobs)
    problem = build_problem(cfg)
    n_groups = len(problem.constraints)

    traj_paths = []
    for (summ, record) in results:
        p = outdir / f"trajectory_seed{summ.seed}.csv"
        _write_trajectory(p, cfg, record, n_groups)
        traj_paths.append(p)
        if record.diverged:
            log.warning("seed %d diverged: %s", summ.seed, record.divergence_message)

    row = aggregate([s for s, _ in results], strategy=cfg.strategy, model=cfg.model)
    agg_path = outdir / "aggregate.csv"
    _write_aggregate(agg_path, cfg, row)
    if not math.isnan(row.mean_best_err) and row.mean_best_err > POOR_FIT_THRESHOLD:
        log.warning("poor fit: mean best error %.3g exceeds %.2g",
                    row.mean_best_err, POOR_FIT_THRESHOLD)

    ok = [(s, r) for s, r in results if not s.diverged]
    heat_csv = heat_svg = model_bin = None
    if ok:
        best = min(ok, key=lambda sr: sr[0].best_error)
        heat_csv, heat_svg = _write_heatmap(outdir, cfg, problem, best[1])
        params = best[1].best_params or best[1].final_params
        model_bin = outdir / "model.bin"
        save_params(model_bin, params)
    return RunArtifacts(
        outdir, traj_paths, agg_path, heat_csv, heat_svg, model_bin, row,
        all_diverged=not ok,
    )


def sweep(cfg: ExperimentConfig, key: str, values: list[str],
          jobs: int | None = None) -> Path:
    """Run one configuration per value of ``key``; write a combined CSV."""
    from .config import apply_overrides

    base_out = Path(cfg.outdir)
    base_out.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{key},problem,model,strategy,n_trials,mean_best_err,std_best_err,"
        "mean_final_err,diverged_count"
    ]
    for v in values:
        sub = ExperimentConfig(**vars(cfg))
        sub = apply_overrides(sub, {key: v})
        sub.outdir = str(base_out / f"{key}_{v}")
        art = run(sub, jobs)
        r = art.row
        std = _fnum(r.std_best_err) if r.std_best_err is not None else ""
        lines.append(
            ",".join(
                [
                    v,
                    sub.problem,
                    sub.model,
                    sub.strategy,
                    str(r.n_trials),
                    _fnum(r.mean_best_err),
                    std,
                    _fnum(r.mean_final_err),
                    str(r.diverged_count),
                ]
            )
        )
    path = base_out / "sweep.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


BENCH_EPOCHS = 200


def bench(cfg: ExperimentConfig, strategies: list[str] | None = None,
          jobs: int | None = None) -> Path:
    """Fixed-length timing pass per strategy on one problem/model.

    Timings come from in-memory per-epoch measurements (first 5 epochs
    excluded as warm-up), so the written CSV reflects real wall time even
    when the deterministic-output mode zeroes wall_ms in trajectories.
    """
    strategies = strategies or ["vanilla", "augmented_lagrangian"]
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["strategy,model,ms_mean,ms_std"]
    for strat in strategies:
        sub = ExperimentConfig(**vars(cfg))
        sub.strategy = bal.canonical_strategy(strat)
        sub.epochs = BENCH_EPOCHS
        sub.n_trials = 1
        _, record = run_trial(sub, sub.seed)
        body = record.epoch_ms[5:]
        mean = sum(body) / len(body)
        var = sum((t - mean) ** 2 for t in body) / (len(body) - 1)
        lines.append(
            f"{sub.strategy},{sub.model},{mean:.3f},{math.sqrt(var):.3f}"
        )
    path = outdir / "bench.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
