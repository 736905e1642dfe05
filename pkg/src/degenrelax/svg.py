"""Minimal deterministic SVG line plots (no plotting toolkit, byte-stable output)."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import PlotIOError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 400
MARGIN = (60, 20, 30, 50)  # left, right, top, bottom


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, n: int = 5):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def render_svg(series, title: str = "", xlabel: str = "x", ylabel: str = "") -> str:
    """series: sequence of (label, xs, ys)."""
    series = list(series)
    if not series:
        raise PlotIOError("nothing to plot: no series")
    clean = []
    for label, xs, ys in series:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.size == 0 or xs.size != ys.size:
            raise PlotIOError(f"series {label!r} is empty or has mismatched lengths")
        if np.any(np.diff(xs) < 0):
            raise ValueError(f"series {label!r} has unsorted x values")
        clean.append((str(label), xs, ys))
    allx = np.concatenate([c[1] for c in clean])
    ally = np.concatenate([c[2] for c in clean])
    ally = ally[np.isfinite(ally)]
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = (float(ally.min()), float(ally.max())) if ally.size else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="13">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(x0, x1):
        X = _fmt(px(t))
        out.append(f'<line x1="{X}" y1="{top + ph}" x2="{X}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{top + ph + 16}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="10">{t:.3g}</text>')
    for t in _ticks(y0, y1):
        Y = _fmt(py(t))
        out.append(f'<line x1="{left - 4}" y1="{Y}" x2="{left}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{left - 6}" y="{Y}" text-anchor="end" dominant-baseline="middle" '
                   f'font-family="sans-serif" font-size="10">{t:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{HEIGHT - 8}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="11">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{top + ph / 2:.2f}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11" transform="rotate(-90 14 {top + ph / 2:.2f})">{escape(ylabel)}</text>')
    for k, (label, xs, ys) in enumerate(clean):
        color = PALETTE[k % len(PALETTE)]
        finite = np.isfinite(ys)
        runs, cur = [], []
        for x, y, ok in zip(xs, ys, finite):
            if ok:
                cur.append(f"{_fmt(px(x))},{_fmt(py(y))}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        for run in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(run)}"/>')
        ly = top + 14 + 14 * k
        out.append(f'<line x1="{left + pw - 110}" y1="{ly}" x2="{left + pw - 90}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw - 85}" y="{ly}" dominant-baseline="middle" font-family="sans-serif" '
                   f'font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series, path, title: str = "", xlabel: str = "x", ylabel: str = "") -> Path:
    text = render_svg(series, title, xlabel, ylabel)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise PlotIOError(f"cannot write {path}: {exc}") from exc
    return path
