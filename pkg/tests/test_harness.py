import numpy as np
import pytest

from alpinn import runner
from alpinn.cli import main
from alpinn.config import ExperimentConfig
from alpinn.network import load_params
from alpinn.problems import by_name
from alpinn.config import architecture_for


def tiny_cfg(tmp_path, **kw):
    base = dict(
        model="custom",
        hidden="8,8",
        strategy="augmented_lagrangian",
        beta=1.0,
        eta_lambda=0.01,
        epochs=5,
        n_trials=2,
        eval_every=2,
        eval_n=25,
        n_r=64,
        n_b=40,
        n_i=20,
        outdir=str(tmp_path / "out"),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_produces_all_artifacts(tmp_path):
    art = runner.run(tiny_cfg(tmp_path))
    assert art.aggregate_csv.exists()
    assert len(art.trajectory_csvs) == 2
    for p in art.trajectory_csvs:
        assert p.exists()
    assert art.heatmap_csv.exists()
    assert art.heatmap_svg.exists()
    assert art.model_bin.exists()
    header = art.trajectory_csvs[0].read_text().splitlines()[0]
    assert header == (
        "epoch,total_loss,residual_loss,constraint_loss_g0,"
        "lambda_l2_g0,rel_l2_error,wall_ms"
    )
    agg_header = art.aggregate_csv.read_text().splitlines()[0]
    assert agg_header == (
        "problem,model,strategy,n_trials,mean_best_err,std_best_err,"
        "mean_final_err,diverged_count,poor_fit"
    )


def test_one_epoch_run_has_one_row_per_trial(tmp_path):
    art = runner.run(tiny_cfg(tmp_path, epochs=1, eval_every=1))
    for p in art.trajectory_csvs:
        assert len(p.read_text().splitlines()) == 2  # header + 1 row


def test_reruns_are_byte_identical(tmp_path):
    a = runner.run(tiny_cfg(tmp_path / "a"))
    b = runner.run(tiny_cfg(tmp_path / "b"))
    for pa, pb in zip(a.trajectory_csvs, b.trajectory_csvs):
        assert pa.read_bytes() == pb.read_bytes()
    assert a.aggregate_csv.read_bytes() == b.aggregate_csv.read_bytes()


def test_parallel_matches_serial(tmp_path):
    a = runner.run(tiny_cfg(tmp_path / "ser"), jobs=1)
    b = runner.run(tiny_cfg(tmp_path / "par"), jobs=2)
    for pa, pb in zip(a.trajectory_csvs, b.trajectory_csvs):
        assert pa.read_bytes() == pb.read_bytes()
    assert a.aggregate_csv.read_bytes() == b.aggregate_csv.read_bytes()


def test_saved_model_loads(tmp_path):
    cfg = tiny_cfg(tmp_path)
    art = runner.run(cfg)
    arch = architecture_for(cfg, by_name(cfg.problem).input_dim)
    params = load_params(art.model_bin, arch)
    assert params.flatten().size == arch.n_params()


def test_poor_fit_flag_for_lagrange(tmp_path):
    cfg = tiny_cfg(tmp_path, strategy="lagrange", beta=0.0, n_trials=1, epochs=30)
    art = runner.run(cfg)
    line = art.aggregate_csv.read_text().splitlines()[1]
    assert line.endswith("true")
    assert art.row.mean_best_err > 0.5


def test_divergence_recorded_and_run_continues(tmp_path):
    cfg = tiny_cfg(tmp_path, strategy="penalty", beta_mode="linear",
                   beta_slope=1e308, n_trials=1)
    art = runner.run(cfg)
    assert art.all_diverged
    assert art.row.diverged_count == 1
    assert art.aggregate_csv.exists()


def test_sweep_writes_combined_csv(tmp_path):
    cfg = tiny_cfg(tmp_path, n_trials=1, epochs=3)
    path = runner.sweep(cfg, "beta", ["1", "10"])
    lines = path.read_text().splitlines()
    assert lines[0].startswith("beta,")
    assert len(lines) == 3


def test_bench_reports_requested_strategies(tmp_path, monkeypatch):
    monkeypatch.setattr(runner, "BENCH_EPOCHS", 12)
    cfg = tiny_cfg(tmp_path, n_trials=1)
    path = runner.bench(cfg, ["vanilla", "al"])
    lines = path.read_text().splitlines()
    assert lines[0] == "strategy,model,ms_mean,ms_std"
    assert len(lines) == 3
    assert lines[1].startswith("vanilla,")
    assert lines[2].startswith("augmented_lagrangian,")


def test_timing_flag_controls_wall_ms(tmp_path):
    art = runner.run(tiny_cfg(tmp_path / "no"))
    row = art.trajectory_csvs[0].read_text().splitlines()[1]
    assert row.split(",")[-1] == "0"
    art2 = runner.run(tiny_cfg(tmp_path / "yes", timing=True))
    row2 = art2.trajectory_csvs[0].read_text().splitlines()[1]
    assert float(row2.split(",")[-1]) > 0.0


def test_default_jobs_env(monkeypatch):
    monkeypatch.setenv("ALPINN_JOBS", "3")
    assert runner.default_jobs() == 3
    monkeypatch.setenv("ALPINN_JOBS", "zebra")
    assert runner.default_jobs() == 1


# -- CLI -------------------------------------------------------------------


def write_cfg(tmp_path, cfg):
    from alpinn.config import serialize

    p = tmp_path / "cfg.txt"
    p.write_text(serialize(cfg))
    return p


def test_cli_train_and_plot(tmp_path, capsys):
    cfgfile = write_cfg(tmp_path, tiny_cfg(tmp_path))
    assert main(["train", str(cfgfile)]) == 0
    out = str(tmp_path / "out")
    assert main(["plot", out, "--kind", "trajectory"]) == 0
    assert main(["plot", out, "--kind", "heatmap"]) == 0
    assert main(["plot", out, "--kind", "lambda_norm"]) == 0
    assert (tmp_path / "out" / "trajectory.svg").exists()


def test_cli_override_and_exit_codes(tmp_path):
    cfgfile = write_cfg(tmp_path, tiny_cfg(tmp_path, epochs=2))
    assert main(["train", str(cfgfile), "--epochs", "3"]) == 0
    # config error -> 1
    assert main(["train", str(cfgfile), "--epochs", "0"]) == 1
    assert main(["train", str(cfgfile), "--bogus", "1"]) == 1
    # all trials diverged -> 2
    assert (
        main(
            [
                "train",
                str(cfgfile),
                "--strategy",
                "penalty",
                "--beta_mode",
                "linear",
                "--beta_slope",
                "1e308",
                "--n_trials",
                "1",
            ]
        )
        == 2
    )


def test_cli_paper_defaults(tmp_path):
    cfgfile = write_cfg(tmp_path, tiny_cfg(tmp_path, epochs=2, n_trials=1))
    assert (
        main(
            [
                "train",
                str(cfgfile),
                "--paper-defaults",
                "helmholtz",
                "M2",
                "--model",
                "custom",
                "--epochs",
                "2",
                "--eta_theta",
                "1e-4",
            ]
        )
        == 0
    )
    cfg_text = (tmp_path / "out" / "config.txt").read_text()
    assert "beta = 500.0" in cfg_text


def test_cli_sweep_and_bench(tmp_path, monkeypatch):
    monkeypatch.setattr(runner, "BENCH_EPOCHS", 12)
    cfgfile = write_cfg(tmp_path, tiny_cfg(tmp_path, epochs=2, n_trials=1))
    assert main(["sweep", str(cfgfile), "--vary", "beta=1,10"]) == 0
    assert (tmp_path / "out" / "sweep.csv").exists()
    assert main(["plot", str(tmp_path / "out"), "--kind", "beta_sweep"]) == 0
    assert main(["bench", str(cfgfile), "--strategies", "vanilla,al"]) == 0
    assert main(["sweep", str(cfgfile), "--vary", "beta"]) == 1
