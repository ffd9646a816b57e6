"""Minimal SVG polyline plots: one series, axes with end labels, a title."""

from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 480, 360, 48


def _fmt(v):
    return format(float(v), ".4g")


def line_plot(x, y, title="", xlabel="", ylabel="", version=""):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x0, x1 = float(np.min(x)), float(np.max(x))
    y0, y1 = float(np.min(y)), float(np.max(y))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    w, h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    px = MARGIN + (x - x0) / (x1 - x0) * w
    py = HEIGHT - MARGIN - (y - y0) / (y1 - y0) * h
    points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    bottom, right = HEIGHT - MARGIN, WIDTH - MARGIN
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<!-- fracdyn {escape(version)} -->" if version else "",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{bottom}" stroke="black"/>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="1" points="{points}"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="12" y="{HEIGHT / 2}" font-size="12" transform="rotate(-90 12 {HEIGHT / 2})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
        f'<text x="{MARGIN}" y="{bottom + 16}" font-size="10">{_fmt(x0)}</text>',
        f'<text x="{right}" y="{bottom + 16}" font-size="10" text-anchor="end">{_fmt(x1)}</text>',
        f'<text x="{MARGIN - 4}" y="{bottom}" font-size="10" text-anchor="end">{_fmt(y0)}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN + 4}" font-size="10" text-anchor="end">{_fmt(y1)}</text>',
        "</svg>",
    ]
    return "\n".join(p for p in parts if p) + "\n"
