"""Static SVG line charts of FDR against theta0, one panel per (m, s_frac)."""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from .simulate import MetricsReport

PANEL_W = 260
PANEL_H = 190
MARGIN_L = 48
MARGIN_T = 30
MARGIN_B = 36
GAP = 24

PROC_COLOURS = {"ell": "#d4a017", "cl": "#2e8b57", "q": "#1f5fbf", "bh": "#c0392b"}
DASHES = ["", "6,3", "2,3", "8,3,2,3"]


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_svg(report: MetricsReport, path=None, facets: Optional[Sequence[Tuple[int, float]]] = None,
               metric: str = "fdr_mean") -> str:
    """Write the chart to ``path`` (if given) and return the SVG text.

    ``facets`` restricts and orders the panels; by default every (m, s_frac)
    in the report is drawn, rows by m and columns by s_frac.
    """
    if not report.rows:
        raise ValueError("empty report")
    ms = sorted({r.m for r in report.rows})
    ss = sorted({r.s_frac for r in report.rows})
    if facets is None:
        facets = [(m, s) for m in ms for s in ss]
        ncol = len(ss)
    else:
        facets = list(facets)
        ncol = min(3, len(facets))
    nrow = (len(facets) + ncol - 1) // ncol
    th_all = sorted({r.theta0 for r in report.rows})
    x_lo, x_hi = min(th_all), max(th_all)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.01, x_hi + 0.01
    series_keys = sorted({(r.procedure, r.t) for r in report.rows},
                         key=lambda k: (list(PROC_COLOURS).index(k[0]) if k[0] in PROC_COLOURS else 99, k[1]))
    t_levels = sorted({r.t for r in report.rows})
    y_hi = max([getattr(r, metric) for r in report.rows] + t_levels)
    y_hi = max(0.05, min(1.0, 1.1 * y_hi))

    width = MARGIN_L + ncol * (PANEL_W + GAP) + 140
    height = MARGIN_T + nrow * (PANEL_H + MARGIN_B + GAP)
    out: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for idx, (m, s) in enumerate(facets):
        col, row = idx % ncol, idx // ncol
        ox = MARGIN_L + col * (PANEL_W + GAP)
        oy = MARGIN_T + row * (PANEL_H + MARGIN_B + GAP)

        def px(x):
            return ox + (x - x_lo) / (x_hi - x_lo) * PANEL_W

        def py(y):
            return oy + PANEL_H - y / y_hi * PANEL_H

        out.append(f'<g class="panel" data-m="{m}" data-s-frac="{s:g}">')
        out.append(f'<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" '
                   f'fill="none" stroke="#444"/>')
        out.append(f'<text x="{_f(ox + PANEL_W / 2)}" y="{oy - 8}" text-anchor="middle">'
                   f'm = {m}, s/n = {s:g}</text>')
        for k in range(5):
            yv = y_hi * k / 4
            out.append(f'<text x="{ox - 4}" y="{_f(py(yv) + 3)}" text-anchor="end">{yv:.2f}</text>')
        for k in range(5):
            xv = x_lo + (x_hi - x_lo) * k / 4
            out.append(f'<text x="{_f(px(xv))}" y="{oy + PANEL_H + 14}" text-anchor="middle">'
                       f'{xv:.2f}</text>')
        for t in t_levels:
            if t <= y_hi:
                out.append(f'<line class="reference" data-t="{t:g}" x1="{ox}" y1="{_f(py(t))}" '
                           f'x2="{ox + PANEL_W}" y2="{_f(py(t))}" stroke="#999" '
                           f'stroke-dasharray="1,2"/>')
        for proc, t in series_keys:
            pts = sorted((r.theta0, getattr(r, metric)) for r in report.rows
                         if r.m == m and r.s_frac == s and r.procedure == proc and r.t == t)
            if not pts:
                continue
            colour = PROC_COLOURS.get(proc, "#000")
            dash = DASHES[t_levels.index(t) % len(DASHES)]
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            if len(pts) > 1:
                coords = " ".join(f"{_f(px(x))},{_f(py(y))}" for x, y in pts)
                out.append(f'<polyline points="{coords}" fill="none" stroke="{colour}" '
                           f'stroke-width="1.5"{dash_attr}/>')
            for x, y in pts:
                out.append(f'<circle cx="{_f(px(x))}" cy="{_f(py(y))}" r="2" fill="{colour}"/>')
        out.append("</g>")
        if row == nrow - 1:
            out.append(f'<text x="{_f(ox + PANEL_W / 2)}" y="{oy + PANEL_H + 30}" '
                       f'text-anchor="middle">theta0</text>')
    lx = MARGIN_L + ncol * (PANEL_W + GAP)
    for i, (proc, t) in enumerate(series_keys):
        y = MARGIN_T + 12 + 16 * i
        colour = PROC_COLOURS.get(proc, "#000")
        dash = DASHES[t_levels.index(t) % len(DASHES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 24}" y2="{y}" stroke="{colour}" '
                   f'stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{lx + 30}" y="{y + 3}">{escape(proc)} t={t:g}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text
