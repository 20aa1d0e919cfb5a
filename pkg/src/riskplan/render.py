"""SVG drawing of a grid, its reward field and planned paths."""

from __future__ import annotations

from typing import Mapping
from xml.sax.saxutils import escape

from .domain import OccupancyGrid, Path, PlanningGraph
from .reward import RewardMap

CELL = 32
OBSTACLE_FILL = "#d62728"
STROKES = {
    "exact": ("#1f4e9c", ""),
    "approximate": ("#ff7f0e", ' stroke-dasharray="6 3"'),
}
EXTRA_STROKES = ["#6a3d9a", "#17becf", "#8c564b", "#e377c2"]


def _green(r: float) -> str:
    # white at reward 0, saturated green at 1
    c = round(255 * (1 - 0.75 * r))
    return f"rgb({c},{255 - round(55 * r)},{c})"


def render_svg(
    grid: OccupancyGrid,
    graph: PlanningGraph,
    rewards: RewardMap | None = None,
    paths: Mapping[str, Path] | None = None,
    layer: int | None = None,
) -> str:
    if grid.ndim == 3:
        if layer is None:
            raise ValueError("a 3-D grid needs a layer to render")
        if not 0 <= layer < grid.dims[0]:
            raise ValueError(f"layer {layer} outside 0..{grid.dims[0] - 1}")
        occ = grid.occupied[layer]
        in_layer = lambda c: c[0] == layer  # noqa: E731
        flat = lambda c: c[1:]  # noqa: E731
    else:
        occ = grid.occupied
        in_layer = lambda c: True  # noqa: E731
        flat = lambda c: c  # noqa: E731

    rows, cols = occ.shape
    w, h = cols * CELL, rows * CELL
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    for y in range(rows):
        for x in range(cols):
            if occ[y, x]:
                out.append(f'<rect x="{x * CELL}" y="{y * CELL}" width="{CELL}" height="{CELL}" fill="{OBSTACLE_FILL}"/>')
    if rewards is not None:
        for v, cell in enumerate(graph.cells):
            if in_layer(cell):
                y, x = flat(cell)
                out.append(
                    f'<rect x="{x * CELL}" y="{y * CELL}" width="{CELL}" height="{CELL}" fill="{_green(rewards[v])}"/>'
                )
    for i in range(rows + 1):
        out.append(f'<line x1="0" y1="{i * CELL}" x2="{w}" y2="{i * CELL}" stroke="#cccccc"/>')
    for j in range(cols + 1):
        out.append(f'<line x1="{j * CELL}" y1="0" x2="{j * CELL}" y2="{h}" stroke="#cccccc"/>')

    extra = iter(EXTRA_STROKES * 8)
    for label, path in (paths or {}).items():
        color, dash = STROKES.get(label) or (next(extra), "")
        pts = []
        for v in path.vertices:
            y, x = flat(graph.cells[v])
            pts.append(f"{x * CELL + CELL // 2},{y * CELL + CELL // 2}")
        out.append(
            f'<polyline class="path" data-label="{escape(label)}" points="{" ".join(pts)}" fill="none" '
            f'stroke="{color}" stroke-width="3"{dash}/>'
        )

    if in_layer(grid.start):
        y, x = flat(grid.start)
        out.append(f'<circle cx="{x * CELL + CELL // 2}" cy="{y * CELL + CELL // 2}" r="{CELL // 4}" fill="#000000"/>')
    if grid.poi is not None and in_layer(grid.poi):
        y, x = flat(grid.poi)
        cx, cy, s = x * CELL + CELL // 2, y * CELL + CELL // 2, CELL // 3
        out.append(
            f'<polygon points="{cx},{cy - s} {cx + s},{cy} {cx},{cy + s} {cx - s},{cy}" fill="#ffd700" stroke="#000000"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
