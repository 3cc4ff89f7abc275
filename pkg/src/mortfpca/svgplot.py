"""Tiny dependency-free SVG line charts for CLI diagnostics.

Only what the command-line reports need: multiple labelled series over a
shared x axis, fixed-format coordinates so output is byte-stable.
"""

from __future__ import annotations

import numpy as np

from .errors import IoError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _scale(values, lo, hi, out_lo, out_hi):
    span = hi - lo
    if span <= 0:
        span = 1.0
    return out_lo + (np.asarray(values, float) - lo) * (out_hi - out_lo) / span


def line_chart(path, x, series, title="", width=720, height=440, y_label=""):
    """Write a multi-series line chart.

    ``series`` is a list of (label, y-values) pairs sharing the x grid.
    """
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for _, y in series]
    labels = [label for label, _ in series]
    y_all = np.concatenate(ys)
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo, y_hi = float(y_all.min()), float(y_all.max())
    pad = 0.05 * (y_hi - y_lo or 1.0)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    left, right, top, bottom = 60, width - 20, 40, height - 40
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        yv = y_lo + frac * (y_hi - y_lo)
        px = left + frac * (right - left)
        py = bottom - frac * (bottom - top)
        parts.append(
            f'<text x="{px:.1f}" y="{bottom + 16}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{xv:g}</text>'
        )
        parts.append(
            f'<text x="{left - 6}" y="{py:.1f}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{yv:.3g}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="14" y="{(top + bottom) // 2}" font-size="11" font-family="sans-serif" '
            f'transform="rotate(-90 14 {(top + bottom) // 2})" text-anchor="middle">{y_label}</text>'
        )
    for k, (label, y) in enumerate(zip(labels, ys)):
        px = _scale(x, x_lo, x_hi, left, right)
        py = _scale(y, y_lo, y_hi, bottom, top)
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = PALETTE[k % len(PALETTE)]
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>'
        )
        parts.append(
            f'<text x="{right - 150}" y="{top + 16 * k}" font-size="11" fill="{color}" '
            f'font-family="sans-serif">{label}</text>'
        )
    parts.append("</svg>")
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
