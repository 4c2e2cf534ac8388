# component_id: geometry_pkg_init
# kind: code
# area: geometry
# status: stable
# purpose: Package initialization for scan-route geometry.

from .render import RenderFormat, render_ascii, render_route, render_svg
from .route_ops import gather_routes, gather_sequence, scatter_routes, scatter_section
from .scan_route import (
    PATTERN_METRIC,
    ROUTES_PER_PATTERN,
    AdjacencyMetric,
    AdjacencyReport,
    AdjacencyViolation,
    GridShape,
    RouteVariant,
    ScanPattern,
    ScanRoute,
    adjacency_report,
    build_route,
    dump_route,
    invert,
    parse_route_dump,
    reflect_cell,
    route_set,
    routes_share_layout,
)

__all__ = [
    "PATTERN_METRIC",
    "ROUTES_PER_PATTERN",
    "AdjacencyMetric",
    "AdjacencyReport",
    "AdjacencyViolation",
    "GridShape",
    "RenderFormat",
    "RouteVariant",
    "ScanPattern",
    "ScanRoute",
    "adjacency_report",
    "build_route",
    "dump_route",
    "gather_routes",
    "gather_sequence",
    "invert",
    "parse_route_dump",
    "reflect_cell",
    "render_ascii",
    "render_route",
    "render_svg",
    "route_set",
    "routes_share_layout",
    "scatter_routes",
    "scatter_section",
]
