"""Minimal deterministic SVG line plots and heatmaps.

Presentation only: every plotted number is also written to CSV. Output has
no timestamps or random ids, so identical inputs give identical files.
"""

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


@dataclass
class Series:
    y: np.ndarray
    x: np.ndarray = None
    label: str = ""
    color: str = "#000000"
    width: float = 1.0
    dash: str = ""
    opacity: float = 1.0


def _f(v):
    return f"{v:.2f}"


def _nice_ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    ticks = np.arange(start, hi + 0.5 * step, step)
    return [float(t) for t in ticks if lo - 1e-12 <= t <= hi + 1e-12]


def _header(title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
    ]


def line_plot(path, series, title="", xlabel="", ylabel=""):
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    xs = [np.arange(1, len(s.y) + 1) if s.x is None else np.asarray(s.x) for s in series]
    all_x = np.concatenate(xs)
    all_y = np.concatenate([np.asarray(s.y, dtype=float) for s in series])
    xlo, xhi = float(all_x.min()), float(all_x.max())
    ylo, yhi = float(all_y.min()), float(all_y.max())
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad
    if xhi == xlo:
        xhi = xlo + 1.0

    def px(v):
        return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)

    def py(v):
        return y0 + (v - ylo) / (yhi - ylo) * (y1 - y0)

    out = _header(title)
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#444"/>')
    for t in _nice_ticks(ylo, yhi):
        out.append(f'<line x1="{x0 - 4}" y1="{_f(py(t))}" x2="{x0}" y2="{_f(py(t))}" stroke="#444"/>')
        out.append(f'<text x="{x0 - 7}" y="{_f(py(t) + 4)}" text-anchor="end">{t:g}</text>')
    for t in _nice_ticks(xlo, xhi):
        out.append(f'<line x1="{_f(px(t))}" y1="{y0}" x2="{_f(px(t))}" y2="{y0 + 4}" stroke="#444"/>')
        out.append(f'<text x="{_f(px(t))}" y="{y0 + 17}" text-anchor="middle">{t:g}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>'
    )
    legend = []
    for s, x in zip(series, xs):
        pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(x, s.y))
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{s.color}" '
            f'stroke-width="{s.width}" stroke-opacity="{s.opacity}"{dash}/>'
        )
        if s.label:
            legend.append(s)
    for k, s in enumerate(legend):
        ly = y1 + 14 + 16 * k
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        out.append(
            f'<line x1="{x1 - 150}" y1="{ly}" x2="{x1 - 125}" y2="{ly}" '
            f'stroke="{s.color}" stroke-width="{max(s.width, 1.5)}"{dash}/>'
        )
        out.append(f'<text x="{x1 - 120}" y="{ly + 4}">{escape(s.label)}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def _diverging(v, vmax):
    # white at 0, red positive, blue negative
    a = 0.0 if vmax == 0 else max(-1.0, min(1.0, v / vmax))
    if a >= 0:
        r, g, b = 255, int(round(255 * (1 - a))), int(round(255 * (1 - a)))
    else:
        r, g, b = int(round(255 * (1 + a))), int(round(255 * (1 + a))), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(path, A, title=""):
    """Symmetric diverging colour scale centred at zero."""
    A = np.asarray(A, dtype=float)
    n_rows, n_cols = A.shape
    size = min(WIDTH - 160, HEIGHT - 90)
    cell = size / max(n_rows, n_cols)
    left, top = 60, 45
    vmax = float(np.max(np.abs(A))) if A.size else 0.0
    out = _header(title)
    for i in range(n_rows):
        for j in range(n_cols):
            out.append(
                f'<rect x="{_f(left + j * cell)}" y="{_f(top + i * cell)}" '
                f'width="{_f(cell + 0.05)}" height="{_f(cell + 0.05)}" fill="{_diverging(A[i, j], vmax)}"/>'
            )
    out.append(
        f'<rect x="{left}" y="{top}" width="{_f(n_cols * cell)}" height="{_f(n_rows * cell)}" '
        'fill="none" stroke="#444"/>'
    )
    bar_x = left + n_cols * cell + 25
    steps = 50
    for k in range(steps):
        v = vmax * (1 - 2 * k / (steps - 1))
        out.append(
            f'<rect x="{_f(bar_x)}" y="{_f(top + k * size / steps)}" width="14" '
            f'height="{_f(size / steps + 0.05)}" fill="{_diverging(v, vmax)}"/>'
        )
    out.append(f'<text x="{_f(bar_x + 20)}" y="{top + 10}">{vmax:.3g}</text>')
    out.append(f'<text x="{_f(bar_x + 20)}" y="{_f(top + size / 2 + 4)}">0</text>')
    out.append(f'<text x="{_f(bar_x + 20)}" y="{_f(top + size)}">{-vmax:.3g}</text>')
    out.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")
