"""Minimal dependency-free SVG line plots."""

from __future__ import annotations

from xml.sax.saxutils import escape

_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def line_plot(series, xlabel, ylabel, title="", width=640, height=420, ylim=(0.0, 1.0)):
    """``series`` is a list of (label, xs, ys).  Output is byte-stable."""
    left, right, top, bottom = 60, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom
    xs_all = [x for _, xs, _ in series for x in xs]
    x0, x1 = (min(xs_all), max(xs_all)) if xs_all else (0.0, 1.0)
    if x1 == x0:
        x1 = x0 + 1.0
    y0, y1 = ylim

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in range(6):
        yv = y0 + (y1 - y0) * k / 5
        out.append(f'<text x="{left - 8}" y="{py(yv) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{yv:.2f}</text>')
        xv = x0 + (x1 - x0) * k / 5
        out.append(f'<text x="{px(xv):.2f}" y="{top + ph + 16}" font-size="11" '
                   f'text-anchor="middle">{xv:.2f}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" font-size="13" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2:.2f}" y="{top - 10}" font-size="14" '
                   f'text-anchor="middle">{escape(title)}</text>')
    for i, (label, xs, ys) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly - 4}" x2="{left + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly}" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
