"""Command-line interface: train, sweep, plot, bench.

Any config key can be overridden with ``--key value``.  Exit codes:
0 success (possibly with warnings), 1 configuration error, 2 every
trial diverged.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import runner, svgplot
from .config import (
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    paper_defaults,
    parse_config,
)

__all__ = ["main"]

log = logging.getLogger(__name__)


def _collect_overrides(extra: list[str]) -> dict[str, str]:
    out = {}
    i = 0
    while i < len(extra):
        key = extra[i]
        if not key.startswith("--") or i + 1 >= len(extra):
            raise ConfigError(f"expected '--key value' pairs, got {extra[i:]}")
        out[key[2:]] = extra[i + 1]
        i += 2
    return out


def _load_config(args, extra: list[str]) -> ExperimentConfig:
    if args.config:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
    else:
        cfg = ExperimentConfig()
    if getattr(args, "paper_defaults", None):
        problem, model = args.paper_defaults
        cfg = paper_defaults(cfg, problem, model)
    return apply_overrides(cfg, _collect_overrides(extra))


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def _cmd_train(args, extra) -> int:
    cfg = _load_config(args, extra)
    art = runner.run(cfg, jobs=args.jobs)
    print(f"aggregate: {art.aggregate_csv}")
    print(
        f"mean best error {art.row.mean_best_err:.6g} over "
        f"{art.row.n_trials} trial(s), {art.row.diverged_count} diverged"
    )
    return 2 if art.all_diverged else 0


def _cmd_sweep(args, extra) -> int:
    cfg = _load_config(args, extra)
    if "=" not in args.vary:
        raise ConfigError("--vary expects key=v1,v2,...")
    key, vals = args.vary.split("=", 1)
    values = [v for v in vals.split(",") if v]
    if not values:
        raise ConfigError("--vary got an empty value list")
    path = runner.sweep(cfg, key.strip(), values, jobs=args.jobs)
    print(f"sweep results: {path}")
    return 0


def _cmd_bench(args, extra) -> int:
    cfg = _load_config(args, extra)
    strategies = [s for s in args.strategies.split(",") if s]
    path = runner.bench(cfg, strategies, jobs=args.jobs)
    print(path.read_text(), end="")
    return 0


def _cmd_plot(args, extra) -> int:
    if extra:
        raise ConfigError(f"unexpected arguments {extra}")
    d = Path(args.dir)
    kind = args.kind
    out = Path(args.output) if args.output else d / f"{kind}.svg"
    if kind in ("trajectory", "lambda_norm"):
        paths = sorted(d.glob("trajectory_seed*.csv"))
        if not paths:
            raise svgplot.PlotError(f"no trajectory CSVs in {d}")
        rows = {p.stem.replace("trajectory_", ""): _read_csv(p) for p in paths}
        if kind == "trajectory":
            svg = svgplot.trajectory_svg(rows, column=args.column)
        else:
            svg = svgplot.lambda_norm_svg(rows)
    elif kind == "heatmap":
        svg = svgplot.heatmap_svg(_read_csv(d / "heatmap.csv"))
    elif kind == "beta_sweep":
        svg = svgplot.beta_sweep_svg(_read_csv(d / "sweep.csv"))
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown plot kind {kind!r}")
    out.write_text(svg)
    print(out)
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    ap = argparse.ArgumentParser(
        prog="alpinn",
        description="Constrained-optimization training for physics-informed "
        "neural networks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("config", nargs="?", default=None,
                           help="sectioned key = value config file")
            p.add_argument("--paper-defaults", nargs=2, metavar=("PROBLEM", "MODEL"),
                           help="fill published best hyperparameters")
        p.add_argument("--jobs", type=int, default=None,
                       help="parallel trials (default: ALPINN_JOBS or 1)")

    p = sub.add_parser("train", help="run n_trials trainings and persist artifacts")
    common(p)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("sweep", help="run one training per value of a config key")
    common(p)
    p.add_argument("--vary", required=True, metavar="KEY=V1,V2,...",
                   help="config key and comma-separated values")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("plot", help="render SVG plots from run artifacts")
    p.add_argument("dir", help="run output directory")
    p.add_argument("--kind", required=True,
                   choices=["trajectory", "heatmap", "beta_sweep", "lambda_norm"])
    p.add_argument("--column", default="total_loss",
                   help="trajectory column to plot (default: total_loss)")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(fn=_cmd_plot)

    p = sub.add_parser("bench", help="per-strategy ms/epoch timing pass")
    common(p)
    p.add_argument("--strategies", default="vanilla,al",
                   help="comma-separated strategy list")
    p.set_defaults(fn=_cmd_bench)

    args, extra = ap.parse_known_args(argv)
    try:
        return args.fn(args, extra)
    except (ConfigError, svgplot.PlotError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
