"""Minimal dependency-free SVG renderers for wealth curves and frontier
scatters.  Output is deterministic: fixed canvas, fixed float formatting."""

from __future__ import annotations

from pathlib import Path

WIDTH = 800
HEIGHT = 450
MARGIN = 50

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo
    if span <= 0:
        span = 1.0
    return [out_lo + (v - lo) / span * (out_hi - out_lo) for v in values]


def _frame(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="#888"/>',
    ]


def line_chart(series: dict[str, list[float]], title: str, path: str | Path) -> None:
    """One polyline per named series over a shared integer x axis."""
    all_vals = [v for vals in series.values() for v in vals]
    lo, hi = min(all_vals), max(all_vals)
    n = max(len(v) for v in series.values())
    parts = _frame(title)
    for idx, (name, vals) in enumerate(series.items()):
        xs = _scale(range(len(vals)), 0, max(n - 1, 1), MARGIN, WIDTH - MARGIN)
        ys = _scale(vals, lo, hi, HEIGHT - MARGIN, MARGIN)
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        color = PALETTE[idx % len(PALETTE)]
        parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 16 * idx + 10}" '
            f'font-family="sans-serif" font-size="11" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def scatter_chart(x: list[float], y: list[float], title: str, path: str | Path,
                  highlight: tuple[float, float] | None = None) -> None:
    """Point cloud (e.g. volatility vs return) with an optional marked point."""
    x_lo, x_hi = min(x), max(x)
    y_lo, y_hi = min(y), max(y)
    xs = _scale(x, x_lo, x_hi, MARGIN, WIDTH - MARGIN)
    ys = _scale(y, y_lo, y_hi, HEIGHT - MARGIN, MARGIN)
    parts = _frame(title)
    for px, py in zip(xs, ys):
        parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="1" fill="#1f77b4" fill-opacity="0.35"/>')
    if highlight is not None:
        hx = _scale([highlight[0]], x_lo, x_hi, MARGIN, WIDTH - MARGIN)[0]
        hy = _scale([highlight[1]], y_lo, y_hi, HEIGHT - MARGIN, MARGIN)[0]
        parts.append(f'<circle cx="{hx:.2f}" cy="{hy:.2f}" r="5" fill="none" stroke="#d62728" stroke-width="2"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
