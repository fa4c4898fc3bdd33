"""Deterministic standalone SVG output for render models and grids.

Coordinates are written at fixed 3-decimal precision; identical inputs
always produce byte-identical documents.  Sunburst nodes become annular
sector paths (the root a circle), icicle nodes become rects.  Angular
extents of a whole turn are drawn as two half-arcs since a single SVG arc
cannot close a full circle, and degenerate slivers are still emitted so
no leaf ever silently disappears.
"""

from __future__ import annotations

import math

from .compose import GridResult, RenderModel, RenderNode
from .docio import fmt_num
from .layout import Label, NodeArc

SVG_NS = "http://www.w3.org/2000/svg"
GRID_TITLE_HEIGHT = 24  # pixel strip above each grid cell for its title

FULL_TURN = 2.0 * math.pi
_FULL_EPS = 1e-9


def _n(value: float) -> str:
    return fmt_num(value, 3)


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _esc_attr(text: str) -> str:
    return _esc(text).replace('"', "&quot;").replace("\n", "&#10;")


def _polar(cx: float, cy: float, radius: float, angle: float) -> "tuple[float, float]":
    # Angle 0 points up, increasing angle turns clockwise on screen.
    return cx + radius * math.sin(angle), cy - radius * math.cos(angle)


def _arc_to(radius: float, sweep: int, large: int, x: float, y: float) -> str:
    return f"A {_n(radius)} {_n(radius)} 0 {large} {sweep} {_n(x)} {_n(y)}"


def sector_path(arc: NodeArc, cx: float, cy: float, scale: float) -> str:
    """Annular sector path data centred on (cx, cy)."""
    a0, a1 = arc.start_angle, arc.end_angle
    extent = a1 - a0
    r0 = arc.inner_radius * scale
    r1 = arc.outer_radius * scale
    full = extent >= FULL_TURN - _FULL_EPS
    mid = a0 + extent / 2.0
    large = 1 if (extent if not full else extent / 2.0) >= math.pi else 0

    parts = []
    x, y = _polar(cx, cy, r1, a0)
    parts.append(f"M {_n(x)} {_n(y)}")
    if full:
        mx, my = _polar(cx, cy, r1, mid)
        parts.append(_arc_to(r1, 1, 0, mx, my))
        ex, ey = _polar(cx, cy, r1, a1)
        parts.append(_arc_to(r1, 1, 0, ex, ey))
    else:
        ex, ey = _polar(cx, cy, r1, a1)
        parts.append(_arc_to(r1, 1, large, ex, ey))
    ix, iy = _polar(cx, cy, r0, a1)
    parts.append(f"L {_n(ix)} {_n(iy)}")
    if full:
        mx, my = _polar(cx, cy, r0, mid)
        parts.append(_arc_to(r0, 0, 0, mx, my))
        sx, sy = _polar(cx, cy, r0, a0)
        parts.append(_arc_to(r0, 0, 0, sx, sy))
    else:
        sx, sy = _polar(cx, cy, r0, a0)
        parts.append(_arc_to(r0, 0, large, sx, sy))
    parts.append("Z")
    return " ".join(parts)


def _data_attrs(node: RenderNode) -> str:
    return (f' data-id="{_esc_attr(node.geometry.node.text)}"'
            f' data-state="{_esc_attr(node.state)}"'
            f' data-name="{_esc_attr(node.name)}"')


def _shape_element(node: RenderNode, size: float) -> str:
    geom = node.geometry
    title = f"<title>{_esc(node.hover)}</title>"
    style = f' fill="{node.fill}" stroke="#ffffff" stroke-width="0.5"'
    if isinstance(geom, NodeArc):
        cx = cy = size / 2.0
        scale = size / 2.0
        extent = geom.end_angle - geom.start_angle
        if geom.inner_radius == 0.0 and extent >= FULL_TURN - _FULL_EPS:
            r = geom.outer_radius * scale
            return (f'<circle cx="{_n(cx)}" cy="{_n(cy)}" r="{_n(r)}"'
                    f'{style}{_data_attrs(node)}>{title}</circle>')
        d = sector_path(geom, cx, cy, scale)
        return f'<path d="{d}"{style}{_data_attrs(node)}>{title}</path>'
    x = geom.x0 * size
    y = geom.y0 * size
    w = (geom.x1 - geom.x0) * size
    h = (geom.y1 - geom.y0) * size
    return (f'<rect x="{_n(x)}" y="{_n(y)}" width="{_n(w)}" height="{_n(h)}"'
            f'{style}{_data_attrs(node)}>{title}</rect>')


def _label_element(label: Label, kind: str, size: float) -> str:
    if kind == "sunburst":
        x = size / 2.0 + label.x * size / 2.0
        y = size / 2.0 + label.y * size / 2.0
    else:
        x = label.x * size
        y = label.y * size
    return (f'<text x="{_n(x)}" y="{_n(y)}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif" fill="#1a1a1a" '
            f'class="label">{_esc(label.text)}</text>')


def _model_elements(model: RenderModel, size: float) -> "list[str]":
    elements = [_shape_element(node, size) for node in model.nodes]
    elements.extend(_label_element(l, model.kind, size) for l in model.labels)
    return elements


def render_svg(model: RenderModel, size_px: int = 600) -> str:
    """One diagram as a standalone SVG 1.1 document."""
    if size_px <= 0:
        raise ValueError("size_px must be positive")
    body = "\n".join(_model_elements(model, float(size_px)))
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="{SVG_NS}" version="1.1" width="{size_px}" height="{size_px}" '
        f'viewBox="0 0 {size_px} {size_px}">\n{body}\n</svg>\n'
    )


def render_grid_svg(grid: GridResult, cell_px: int = 300) -> str:
    """Row-major grid of diagrams, each under its own title strip."""
    if cell_px <= 0:
        raise ValueError("cell_px must be positive")
    if not grid.models:
        raise ValueError("grid has no cells")
    rows = max(row for row, _ in grid.placements) + 1
    cols = grid.columns
    cell_h = cell_px + GRID_TITLE_HEIGHT
    width = cols * cell_px
    height = rows * cell_h
    groups = []
    for (row, col), model in zip(grid.placements, grid.models):
        tx = col * cell_px
        ty = row * cell_h
        title = (f'<text x="{_n(cell_px / 2.0)}" y="{GRID_TITLE_HEIGHT - 8}" '
                 f'text-anchor="middle" font-size="13" font-family="sans-serif" '
                 f'class="cell-title">{_esc(model.title)}</text>')
        body = "\n".join(_model_elements(model, float(cell_px)))
        groups.append(
            f'<g transform="translate({_n(tx)},{_n(ty)})">\n{title}\n'
            f'<g transform="translate(0,{GRID_TITLE_HEIGHT})">\n{body}\n</g>\n</g>'
        )
    joined = "\n".join(groups)
    return (
        f'<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="{SVG_NS}" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n{joined}\n</svg>\n'
    )
