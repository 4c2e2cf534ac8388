# component_id: route_ops
# kind: runtime_module
# area: geometry
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Apply scan routes to embedding maps (gather) and re-lay route outputs into sections (scatter).

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..core import Tensor
from ..errors import DimensionError
from .scan_route import ScanRoute


def _check_same_grid(routes: Sequence[ScanRoute]) -> None:
    if not routes:
        raise DimensionError("at least one route is required")
    grid = routes[0].grid
    for r in routes[1:]:
        if r.grid != grid:
            raise DimensionError("routes are defined on different grids", (grid.H, grid.W), (r.grid.H, r.grid.W))


def gather_sequence(embedding_map: Tensor, route: ScanRoute) -> Tensor:
    """Read ``(..., H, W)`` along ``route`` into ``(..., L)``.

    ``out[..., t] == map[..., row(perm[t]), col(perm[t])]``.
    """
    x = np.asarray(embedding_map, dtype=np.float64)
    if x.ndim < 2 or x.shape[-2:] != (route.grid.H, route.grid.W):
        raise DimensionError("map spatial extents differ from the route grid", x.shape, (route.grid.H, route.grid.W))
    flat = x.reshape(*x.shape[:-2], route.L)
    return flat[..., route.perm]


def scatter_section(seq: Tensor, route: ScanRoute) -> Tensor:
    """Re-lay a route-ordered ``(..., L)`` sequence into row-major cell order."""
    s = np.asarray(seq, dtype=np.float64)
    if s.ndim < 1 or s.shape[-1] != route.L:
        raise DimensionError(f"sequence length differs from route length {route.L}", s.shape)
    return s[..., route.inv]


def gather_routes(embedding_map: Tensor, routes: Sequence[ScanRoute]) -> Tensor:
    """Fused gather for several routes: ``(B, S, H, W)`` -> ``(B, K, S, L)``."""
    _check_same_grid(routes)
    grid = routes[0].grid
    x = np.asarray(embedding_map, dtype=np.float64)
    if x.ndim != 4 or x.shape[-2:] != (grid.H, grid.W):
        raise DimensionError("map must be (B, S, H, W) on the route grid", x.shape, (grid.H, grid.W))
    flat = x.reshape(x.shape[0], x.shape[1], grid.L)
    index = np.stack([r.perm for r in routes])
    return np.moveaxis(flat[:, :, index], 2, 1)


def scatter_routes(seqs: Tensor, routes: Sequence[ScanRoute]) -> Tensor:
    """Fused scatter for several routes: ``(B, K, S, L)`` -> ``(B, K, S, L)`` sections."""
    _check_same_grid(routes)
    s = np.asarray(seqs, dtype=np.float64)
    if s.ndim != 4 or s.shape[1] != len(routes) or s.shape[-1] != routes[0].L:
        raise DimensionError("sequences must be (B, K, S, L) matching the routes", s.shape)
    index = np.stack([r.inv for r in routes])[None, :, None, :]
    return np.take_along_axis(s, index, axis=-1)


__all__ = ["gather_sequence", "scatter_section", "gather_routes", "scatter_routes"]
