# component_id: route_render
# kind: runtime_module
# area: geometry
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Deterministic text and SVG renderings of scan routes.

from __future__ import annotations

from enum import Enum
from typing import List

from .scan_route import ScanRoute, dump_route

CELL_PX = 40
GRID_STROKE = "#bdbdbd"
PATH_STROKE = "#2e7d32"
START_FILL = "#c62828"


class RenderFormat(str, Enum):
    ASCII = "ascii"
    SVG = "svg"
    PERM = "perm"


def render_ascii(route: ScanRoute) -> str:
    """Grid of visit steps, one text row per grid row, right-aligned."""
    width = len(str(route.L - 1))
    rows: List[str] = []
    for r in range(route.grid.H):
        steps = route.inv[r * route.grid.W:(r + 1) * route.grid.W]
        rows.append(" ".join(str(int(s)).rjust(width) for s in steps))
    return "\n".join(rows) + "\n"


def _center(index: int, route: ScanRoute) -> str:
    r, c = route.grid.cell(index)
    return f"{(c + 0.5) * CELL_PX:.1f},{(r + 0.5) * CELL_PX:.1f}"


def render_svg(route: ScanRoute) -> str:
    """Polyline through the cell centres in visit order.

    Attribute order and number precision are fixed, so output is byte-stable.
    """
    w_px, h_px = route.grid.W * CELL_PX, route.grid.H * CELL_PX
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_px}" height="{h_px}" viewBox="0 0 {w_px} {h_px}">',
        f"  <title>{route.pattern.value} {int(route.variant)} {route.grid.H} {route.grid.W}</title>",
    ]
    for r in range(route.grid.H):
        for c in range(route.grid.W):
            lines.append(
                f'  <rect x="{c * CELL_PX}" y="{r * CELL_PX}" width="{CELL_PX}" height="{CELL_PX}" '
                f'fill="none" stroke="{GRID_STROKE}"/>'
            )
    points = " ".join(_center(int(i), route) for i in route.perm)
    lines.append(f'  <polyline points="{points}" fill="none" stroke="{PATH_STROKE}" stroke-width="2"/>')
    cx, cy = _center(int(route.perm[0]), route).split(",")
    lines.append(f'  <circle cx="{cx}" cy="{cy}" r="4" fill="{START_FILL}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_route(route: ScanRoute, fmt: "RenderFormat | str") -> str:
    fmt = RenderFormat(fmt)
    if fmt is RenderFormat.ASCII:
        return render_ascii(route)
    if fmt is RenderFormat.SVG:
        return render_svg(route)
    return dump_route(route)


__all__ = ["RenderFormat", "render_ascii", "render_svg", "render_route"]
