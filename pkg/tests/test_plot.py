import math

import pytest

from alpinn.svgplot import (
    PlotError,
    beta_sweep_svg,
    heatmap,
    heatmap_svg,
    lambda_norm_svg,
    line_plot,
    trajectory_svg,
)


def test_heatmap_one_rect_per_sample():
    xs, ys, vals = [], [], []
    for i in range(50):
        for j in range(50):
            xs.append(i / 49.0)
            ys.append(j / 49.0)
            vals.append(math.sin(i) * math.cos(j))
    svg = heatmap(xs, ys, vals, "x", "y")
    # 2500 cells plus the 40-segment color legend
    assert svg.count("<rect") == 2500 + 40 + 1  # +1 background
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")


def test_heatmap_rejects_non_grid():
    with pytest.raises(PlotError, match="grid"):
        heatmap([0.0, 1.0, 2.0], [0.0, 1.0, 1.0], [1.0, 2.0, 3.0], "x", "y")


def test_empty_input_raises_and_writes_nothing():
    with pytest.raises(PlotError):
        line_plot([], "x", "y")
    with pytest.raises(PlotError):
        heatmap([], [], [], "x", "y")
    with pytest.raises(PlotError):
        trajectory_svg({"a": []})


def test_missing_column_is_named():
    rows = [{"epoch": "1", "total_loss": "2.0"}]
    with pytest.raises(PlotError, match="rel_l2_error"):
        trajectory_svg({"run": rows}, column="rel_l2_error")
    with pytest.raises(PlotError, match="lambda_l2_g0"):
        lambda_norm_svg({"run": rows})
    with pytest.raises(PlotError, match="mean_best_err"):
        beta_sweep_svg([{"beta": "1"}])
    with pytest.raises(PlotError, match="abs_err"):
        heatmap_svg([{"x": "0", "y": "0", "value": "1"}])


def test_output_is_deterministic():
    rows = {"al": [{"epoch": str(i), "total_loss": str(1.0 / (i + 1))} for i in range(20)]}
    assert trajectory_svg(rows) == trajectory_svg(rows)


def test_lambda_norm_four_beta_series():
    rows_by_label = {}
    for beta in (1, 10, 100, 1000):
        rows_by_label[f"beta={beta}"] = [
            {"epoch": str(i), "lambda_l2_g0": str(beta * (1 - 0.9**i))}
            for i in range(1, 30)
        ]
    svg = lambda_norm_svg(rows_by_label)
    assert svg.count("<polyline") == 4
    for beta in (1, 10, 100, 1000):
        assert f"beta={beta}" in svg


def test_nonfinite_points_dropped():
    svg = line_plot(
        [("a", [1.0, 2.0, 3.0], [1.0, float("nan"), 3.0])], "x", "y", logy=False
    )
    assert "nan" not in svg
    with pytest.raises(PlotError):
        line_plot([("a", [1.0], [float("nan")])], "x", "y")


def test_log_scale_skips_nonpositive():
    svg = line_plot([("a", [1.0, 2.0, 3.0], [0.0, 1e-3, 1e-2])], "x", "y", logy=True)
    assert svg.count("<polyline") == 1


def test_beta_sweep_sorted_logx():
    rows = [
        {"beta": "100", "mean_best_err": "0.5"},
        {"beta": "1", "mean_best_err": "0.1"},
        {"beta": "10", "mean_best_err": "0.3"},
    ]
    svg = beta_sweep_svg(rows)
    assert svg.count("<polyline") == 1


def test_heatmap_svg_uses_first_two_coordinate_columns():
    rows = []
    for i in range(3):
        for j in range(3):
            rows.append({"t": str(i), "x": str(j), "abs_err": str(i + j)})
    svg = heatmap_svg(rows)
    assert ">t<" in svg
    assert ">x<" in svg
