"""Static SVG line plot of S, V, I against time.

Written by hand rather than through a plotting library so the bytes depend
only on the data: fixed decimal formatting, no timestamps or random ids.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=70, right=110, top=30, bottom=50)
SERIES = (("S", "#1f77b4"), ("V", "#2ca02c"), ("I", "#d62728"))


def nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions covering ``[lo, hi]``."""
    if not hi > lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        step = m * mag
        if step >= raw:
            break
    start = math.floor(lo / step) * step
    ticks = []
    k = 0
    while True:
        x = start + k * step
        if x > hi + 1e-9 * step:
            break
        if x >= lo - 1e-9 * step:
            ticks.append(round(x, 12))
        k += 1
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _label(x: float) -> str:
    return f"{x:g}"


def render_svg(t, series: dict, title: str = "") -> str:
    """SVG document for ``series`` (name -> values) against ``t``."""
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        raise ValueError("cannot plot an empty trajectory")
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    x0, x1 = float(t.min()), float(t.max())
    y_all = np.concatenate(list(ys.values()))
    y0, y1 = min(0.0, float(y_all.min())), float(y_all.max())
    xt = nice_ticks(x0, x1 if x1 > x0 else x0 + 1.0)
    yt = nice_ticks(y0, y1 if y1 > y0 else y0 + 1.0)
    x0, x1 = min(x0, xt[0]), max(x1, xt[-1])
    y0, y1 = min(y0, yt[0]), max(y1, yt[-1])

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + ph - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle">{escape(title)}</text>')
    bx, by = MARGIN["left"], MARGIN["top"]
    out.append(f'<rect x="{bx}" y="{by}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for x in xt:
        X = _fmt(px(x))
        out.append(f'<line x1="{X}" y1="{by + ph}" x2="{X}" y2="{by + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X}" y="{by + ph + 18}" text-anchor="middle">{_label(x)}</text>')
    for y in yt:
        Y = _fmt(py(y))
        out.append(f'<line x1="{bx - 5}" y1="{Y}" x2="{bx}" y2="{Y}" stroke="black"/>')
        out.append(f'<text x="{bx - 8}" y="{Y}" text-anchor="end" dominant-baseline="middle">{_label(y)}</text>')
    out.append(f'<text x="{bx + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">t</text>')
    out.append(f'<text x="16" y="{by + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {by + ph / 2:.2f})">individuals</text>')

    colors = dict(SERIES)
    for i, (name, y) in enumerate(ys.items()):
        color = colors.get(name, "#444444")
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(t, y))
        out.append(f'<polyline id="series-{escape(name)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{pts}"/>')
        ly = by + 14 + 18 * i
        lx = bx + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(traj, path, title: str = "") -> None:
    """Write the S, V, I curves of ``traj`` to an SVG file at ``path``."""
    if len(traj) == 0:
        raise ValueError("cannot plot an empty trajectory")
    svg = render_svg(traj.t, {"S": traj.S, "V": traj.V, "I": traj.I}, title)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
