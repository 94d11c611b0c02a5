"""Minimal SVG rendering of capacity-region diagrams.

Written by hand rather than through a plotting library so the document has a
fixed structure: axes are ``<line>`` elements and every curve is exactly one
``<polyline>``.
"""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

WIDTH = 480
HEIGHT = 480
MARGIN = 60
IDEAL = ((0.0, 1.0), (1.0, 0.0))


def _px(point: tuple[float, float]) -> tuple[float, float]:
    span_x = WIDTH - 2 * MARGIN
    span_y = HEIGHT - 2 * MARGIN
    return MARGIN + point[0] * span_x, HEIGHT - MARGIN - point[1] * span_y


def _points_attr(vertices: Sequence[tuple[float, float]]) -> str:
    return " ".join(f"{x:.3f},{y:.3f}" for x, y in map(_px, vertices))


def region_svg(
    curves: Sequence[tuple[str, Sequence[tuple[float, float]]]],
    x_label: str,
    y_label: str,
    title: str = "",
    colors: Sequence[str] = ("#d55e00", "#0173b2", "#029e73", "#cc78bc"),
) -> str:
    """SVG document with the dashed noiseless frontier plus one polyline per curve."""
    x0, y0 = _px((0.0, 0.0))
    x1, _ = _px((1.0, 0.0))
    _, y1 = _px((0.0, 1.0))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x1:.3f}" y2="{y0:.3f}" stroke="black"/>',
        f'<line x1="{x0:.3f}" y1="{y0:.3f}" x2="{x0:.3f}" y2="{y1:.3f}" stroke="black"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        tx, _ = _px((tick, 0.0))
        _, ty = _px((0.0, tick))
        parts.append(f'<text x="{tx:.3f}" y="{y0 + 16:.3f}" text-anchor="middle">{tick:g}</text>')
        parts.append(f'<text x="{x0 - 8:.3f}" y="{ty + 4:.3f}" text-anchor="end">{tick:g}</text>')
    parts.append(
        f'<text x="{(x0 + x1) / 2:.3f}" y="{HEIGHT - 18}" text-anchor="middle">{escape(x_label)}</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2:.3f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.3f})">{escape(y_label)}</text>'
    )
    if title:
        parts.append(f'<text x="{WIDTH / 2}" y="24" text-anchor="middle">{escape(title)}</text>')
    parts.append(
        f'<polyline points="{_points_attr(IDEAL)}" fill="none" stroke="black" '
        f'stroke-dasharray="6,4"><title>noiseless</title></polyline>'
    )
    for i, (label, vertices) in enumerate(curves):
        color = colors[i % len(colors)]
        parts.append(
            f'<polyline points="{_points_attr(vertices)}" fill="none" stroke="{color}" '
            f'stroke-width="2"><title>{escape(label)}</title></polyline>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
