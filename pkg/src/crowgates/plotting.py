"""Minimal standalone SVG line plots rendered from CSV columns."""
from __future__ import annotations

import csv
from html import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
WIDTH, HEIGHT, MARGIN = 640, 400, 56


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def line_plot_svg(x, series: dict, *, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    xs = [float(v) for v in x]
    all_y = [float(v) for ys in series.values() for v in ys]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(all_y), max(all_y)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(v):
        return MARGIN + (v - x0) / (x1 - x0) * pw

    def py(v):
        return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{HEIGHT / 2}" text-anchor="middle" transform="rotate(-90 14 {HEIGHT / 2})">'
        f"{escape(ylabel)}</text>",
    ]
    for tx in _ticks(x0, x1):
        out.append(f'<text x="{px(tx):.1f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{tx:.3g}</text>')
    for ty in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{py(ty) + 4:.1f}" text-anchor="end">{ty:.3g}</text>')
    for k, (name, ys) in enumerate(series.items()):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(float(b)):.2f}" for a, b in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 14 + 14 * k}" text-anchor="end" '
                   f'fill="{colour}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path, svg_path, x_column: str, y_columns, **labels) -> None:
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    x = [float(r[x_column]) for r in rows]
    series = {c: [float(r[c]) for r in rows] for c in y_columns}
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(line_plot_svg(x, series, xlabel=labels.get("xlabel", x_column), **{
            k: v for k, v in labels.items() if k != "xlabel"}))
