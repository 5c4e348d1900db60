"""Dependency-free SVG emission for trajectories, heatmaps, and sweeps.

Output is deterministic: fixed canvas geometry, fixed number formatting,
no timestamps, so the same input always yields the same bytes.
"""

from __future__ import annotations

import math

__all__ = [
    "PlotError",
    "line_plot",
    "heatmap",
    "trajectory_svg",
    "lambda_norm_svg",
    "beta_sweep_svg",
    "heatmap_svg",
]


class PlotError(ValueError):
    pass


_W, _H = 640, 440
_ML, _MR, _MT, _MB = 70, 130, 30, 50
_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        e0 = math.floor(math.log10(lo))
        e1 = math.ceil(math.log10(hi))
        step = max(1, (e1 - e0) // 6)
        return [10.0**e for e in range(e0, e1 + 1, step)]
    if hi == lo:
        return [lo]
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / 4))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= 6:
            step *= mult
            break
    t0 = math.ceil(lo / step) * step
    out = []
    t = t0
    while t <= hi + 1e-12 * abs(span):
        out.append(t)
        t += step
    return out


def _label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}"
    return f"{v:g}"


def line_plot(
    series: list[tuple[str, list[float], list[float]]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    logy: bool = True,
    logx: bool = False,
) -> str:
    """Render labeled (x, y) series as polylines with axes and a legend."""
    if not series or all(len(xs) == 0 for _, xs, _ in series):
        raise PlotError("no data to plot")
    pts = [
        (x, y)
        for _, xs, ys in series
        for x, y in zip(xs, ys)
        if math.isfinite(x) and math.isfinite(y) and (not logy or y > 0) and (not logx or x > 0)
    ]
    if not pts:
        raise PlotError("no finite data points to plot")
    xlo = min(p[0] for p in pts)
    xhi = max(p[0] for p in pts)
    ylo = min(p[1] for p in pts)
    yhi = max(p[1] for p in pts)
    if logx:
        xlo, xhi = max(xlo, 1e-300), max(xhi, 1e-300)
    if logy:
        ylo, yhi = max(ylo, 1e-300), max(yhi, 1e-300)
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo * 10 if logy else ylo + 1.0

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(x):
        if logx:
            f = (math.log10(x) - math.log10(xlo)) / (math.log10(xhi) - math.log10(xlo))
        else:
            f = (x - xlo) / (xhi - xlo)
        return _ML + f * pw

    def sy(y):
        if logy:
            f = (math.log10(y) - math.log10(ylo)) / (math.log10(yhi) - math.log10(ylo))
        else:
            f = (y - ylo) / (yhi - ylo)
        return _MT + (1.0 - f) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        'stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_ML + pw / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for t in _ticks(xlo, xhi, logx):
        if t < xlo or t > xhi:
            continue
        X = sx(t)
        parts.append(
            f'<line x1="{_fmt(X)}" y1="{_MT + ph}" x2="{_fmt(X)}" '
            f'y2="{_MT + ph + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(X)}" y="{_MT + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_label(t)}</text>'
        )
    for t in _ticks(ylo, yhi, logy):
        if t < ylo or t > yhi:
            continue
        Y = sy(t)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{_fmt(Y)}" x2="{_ML}" y2="{_fmt(Y)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{_fmt(Y + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_label(t)}</text>'
        )
    parts.append(
        f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MT + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {_MT + ph / 2:.1f})">{ylabel}</text>'
    )
    for k, (label, xs, ys) in enumerate(series):
        color = _COLORS[k % len(_COLORS)]
        coords = [
            f"{_fmt(sx(x))},{_fmt(sy(y))}"
            for x, y in zip(xs, ys)
            if math.isfinite(x)
            and math.isfinite(y)
            and (not logy or y > 0)
            and (not logx or x > 0)
        ]
        if not coords:
            continue
        parts.append(
            f'<polyline points="{" ".join(coords)}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        ly = _MT + 16 + 18 * k
        parts.append(
            f'<line x1="{_W - _MR + 8}" y1="{ly}" x2="{_W - _MR + 32}" y2="{ly}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR + 38}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="11">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# Simple perceptual-ish colormap: dark blue -> teal -> yellow.
_CMAP = [
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
]


def _color(f: float) -> str:
    f = min(1.0, max(0.0, f))
    for (f0, c0), (f1, c1) in zip(_CMAP, _CMAP[1:]):
        if f <= f1:
            w = 0.0 if f1 == f0 else (f - f0) / (f1 - f0)
            r, g, b = (round(a + w * (b_ - a)) for a, b_ in zip(c0, c1))
            return f"#{r:02x}{g:02x}{b:02x}"
    return "#fde725"


def heatmap(
    xs: list[float], ys: list[float], vals: list[float], xlabel: str, ylabel: str, title: str = ""
) -> str:
    """Render scattered grid samples as colored cells with a value legend.

    The (x, y) values must form a tensor grid; each sample becomes one
    rect, so an n-point input yields exactly n cells.
    """
    if not xs:
        raise PlotError("no data to plot")
    ux = sorted(set(xs))
    uy = sorted(set(ys))
    if len(ux) * len(uy) != len(xs):
        raise PlotError(
            f"{len(xs)} samples do not form a {len(ux)}x{len(uy)} grid"
        )
    vlo, vhi = min(vals), max(vals)
    span = vhi - vlo if vhi > vlo else 1.0
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB
    cw = pw / len(ux)
    ch = ph / len(uy)
    xi = {v: i for i, v in enumerate(ux)}
    yi = {v: i for i, v in enumerate(uy)}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_ML + pw / 2:.1f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for x, y, v in zip(xs, ys, vals):
        cx = _ML + xi[x] * cw
        cy = _MT + (len(uy) - 1 - yi[y]) * ch
        parts.append(
            f'<rect x="{_fmt(cx)}" y="{_fmt(cy)}" width="{_fmt(cw + 0.5)}" '
            f'height="{_fmt(ch + 0.5)}" fill="{_color((v - vlo) / span)}"/>'
        )
    # Color legend.
    lx = _W - _MR + 20
    n_seg = 40
    for i in range(n_seg):
        f = 1.0 - i / (n_seg - 1)
        parts.append(
            f'<rect x="{lx}" y="{_fmt(_MT + i * ph / n_seg)}" width="18" '
            f'height="{_fmt(ph / n_seg + 0.5)}" fill="{_color(f)}"/>'
        )
    for f, v in ((1.0, vhi), (0.5, vlo + 0.5 * span), (0.0, vlo)):
        parts.append(
            f'<text x="{lx + 24}" y="{_fmt(_MT + (1 - f) * ph + 4)}" '
            f'font-family="sans-serif" font-size="11">{v:.3g}</text>'
        )
    parts.append(
        f'<text x="{_ML + pw / 2:.1f}" y="{_H - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MT + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {_MT + ph / 2:.1f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _require(rows: list[dict], cols: list[str]) -> None:
    if not rows:
        raise PlotError("no rows to plot")
    for c in cols:
        if c not in rows[0]:
            raise PlotError(f"missing column {c!r}")


def trajectory_svg(rows_by_label: dict[str, list[dict]], column: str = "total_loss") -> str:
    """Loss (or error) trajectories on a log-scale y axis."""
    series = []
    for label, rows in rows_by_label.items():
        _require(rows, ["epoch", column])
        series.append(
            (label, [float(r["epoch"]) for r in rows], [float(r[column]) for r in rows])
        )
    return line_plot(series, "epoch", column, title="training trajectory")


def lambda_norm_svg(rows_by_label: dict[str, list[dict]], group: int = 0) -> str:
    col = f"lambda_l2_g{group}"
    series = []
    for label, rows in rows_by_label.items():
        _require(rows, ["epoch", col])
        series.append(
            (label, [float(r["epoch"]) for r in rows], [float(r[col]) for r in rows])
        )
    return line_plot(series, "epoch", "multiplier norm", title="multiplier norm", logy=False)


def beta_sweep_svg(rows: list[dict]) -> str:
    _require(rows, ["beta", "mean_best_err"])
    rows = sorted(rows, key=lambda r: float(r["beta"]))
    series = [
        (
            "best error",
            [float(r["beta"]) for r in rows],
            [float(r["mean_best_err"]) for r in rows],
        )
    ]
    return line_plot(series, "beta", "relative L2 error", title="penalty sweep",
                     logx=True, logy=True)


def heatmap_svg(rows: list[dict]) -> str:
    cols = list(rows[0].keys()) if rows else []
    if len(cols) >= 3 and "abs_err" in cols:
        xc, yc = [c for c in cols if c != "abs_err"][:2]
    else:
        raise PlotError("missing column 'abs_err'")
    _require(rows, [xc, yc, "abs_err"])
    return heatmap(
        [float(r[xc]) for r in rows],
        [float(r[yc]) for r in rows],
        [float(r["abs_err"]) for r in rows],
        xc,
        yc,
        title="pointwise absolute error",
    )
