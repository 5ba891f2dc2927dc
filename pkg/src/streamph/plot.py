"""Barcode rendering as plain text or SVG."""
from __future__ import annotations

import math
import shutil

from .types import Interval


def _finite_max(intervals) -> float:
    vals = [x for iv in intervals for x in (iv.birth, iv.death) if math.isfinite(x)]
    return max(vals, default=1.0) or 1.0


def _ordered(intervals):
    return sorted(intervals, key=lambda iv: (iv.dim, iv.birth, iv.death))


def render_txt(intervals: list[Interval], width: int | None = None) -> str:
    if width is None:
        width = shutil.get_terminal_size((80, 24)).columns
    ivs = _ordered(intervals)
    if not ivs:
        return ""
    lines = [f"{iv.dim} {iv.birth!r} {iv.death!r}" for iv in ivs]
    label = max(len(s) for s in lines) + 2
    bar_w = max(10, width - label - 1)
    top = _finite_max(ivs)
    out = []
    for text, iv in zip(lines, ivs):
        a = int(round(iv.birth / top * (bar_w - 1)))
        if iv.is_open:
            bar = " " * a + "=" * (bar_w - a - 1) + ">"
        else:
            b = int(round(iv.death / top * (bar_w - 1)))
            bar = " " * a + "=" * max(1, b - a)
        out.append(text.ljust(label) + bar.rstrip())
    return "\n".join(out) + "\n"


def render_svg(intervals: list[Interval], width: int = 800, bar_h: int = 8, gap: int = 4) -> str:
    """Horizontal bars grouped by dimension; infinite bars run to the margin with an arrowhead."""
    ivs = _ordered(intervals)
    left, right, top_pad = 60, 30, 20
    span = width - left - right
    top = _finite_max(ivs)
    # leave room past the largest finite value so arrows stand out
    scale = span / (top * 1.05)
    rows = []
    y = top_pad
    dims = sorted({iv.dim for iv in ivs})
    for d in dims:
        rows.append(f'<text x="4" y="{y + bar_h}" font-size="12" font-family="monospace">H{d}</text>')
        for iv in (iv for iv in ivs if iv.dim == d):
            x0 = left + iv.birth * scale
            if iv.is_open:
                x1 = left + span - bar_h
                rows.append(
                    f'<rect class="bar open dim{d}" x="{x0:.3f}" y="{y}" width="{max(x1 - x0, 0.5):.3f}" '
                    f'height="{bar_h}" data-birth="{iv.birth!r}" data-death="inf"/>')
                rows.append(
                    f'<polygon class="arrow" points="{x1:.3f},{y - 2} {left + span:.3f},{y + bar_h / 2} '
                    f'{x1:.3f},{y + bar_h + 2}"/>')
            else:
                x1 = left + iv.death * scale
                rows.append(
                    f'<rect class="bar dim{d}" x="{x0:.3f}" y="{y}" width="{max(x1 - x0, 0.5):.3f}" '
                    f'height="{bar_h}" data-birth="{iv.birth!r}" data-death="{iv.death!r}"/>')
            y += bar_h + gap
        y += 3 * gap
    height = y + top_pad
    axis = (f'<line x1="{left}" y1="{height - top_pad}" x2="{left + span}" y2="{height - top_pad}" stroke="black"/>'
            f'<text x="{left}" y="{height - 4}" font-size="10">0</text>'
            f'<text x="{left + top * scale:.3f}" y="{height - 4}" font-size="10">{top:.4g}</text>')
    style = ("<style>.bar{fill:steelblue}.open{fill:darkorange}.arrow{fill:darkorange}"
             ".dim1{fill:seagreen}.dim2{fill:firebrick}</style>")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">{style}' + "".join(rows) + axis + "</svg>\n")
