from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhs_scan.errors import ContractError, DimensionError
from mhs_scan.geometry import (
    AdjacencyMetric,
    GridShape,
    RouteVariant,
    ScanPattern,
    ScanRoute,
    adjacency_report,
    build_route,
    dump_route,
    gather_routes,
    gather_sequence,
    invert,
    parse_route_dump,
    render_ascii,
    render_route,
    render_svg,
    route_set,
    routes_share_layout,
    scatter_routes,
    scatter_section,
)

GOLDEN = Path(__file__).parent / "golden"

grids = st.tuples(st.integers(1, 8), st.integers(1, 8)).map(lambda hw: GridShape(*hw))
patterns = st.sampled_from(list(ScanPattern))
variants = st.sampled_from(list(RouteVariant))


# ---------------------------------------------------------------------------
# Golden routes
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "pattern, variant, H, W, perm",
    [
        ("raster", 0, 2, 3, [0, 1, 2, 3, 4, 5]),
        ("snake", 0, 2, 3, [0, 1, 2, 5, 4, 3]),
        ("spiral", 0, 3, 3, [0, 1, 2, 5, 8, 7, 6, 3, 4]),
        ("diagonal", 0, 2, 3, [0, 3, 1, 2, 4, 5]),
        ("raster", 1, 2, 3, [2, 1, 0, 5, 4, 3]),
        ("raster", 2, 2, 3, [3, 4, 5, 0, 1, 2]),
        ("raster", 3, 2, 3, [5, 4, 3, 2, 1, 0]),
    ],
)
def test_known_routes(pattern, variant, H, W, perm):
    route = build_route(pattern, variant, GridShape(H, W))
    assert route.perm.tolist() == perm


def test_single_cell_grid():
    for pattern in ScanPattern:
        assert build_route(pattern, 3, GridShape(1, 1)).perm.tolist() == [0]


def test_routes_are_read_only():
    route = build_route("snake", 0, GridShape(3, 3))
    with pytest.raises(ValueError):
        route.perm[0] = 4


def test_grid_rejects_empty_extent():
    with pytest.raises(DimensionError):
        GridShape(0, 3)


def test_unknown_pattern_rejected():
    with pytest.raises(ValueError):
        build_route("zigzag", 0, GridShape(2, 2))


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(patterns, variants, grids)
def test_route_is_bijection_with_inverse(pattern, variant, grid):
    route = build_route(pattern, variant, grid)
    ident = np.arange(grid.L)
    assert np.array_equal(np.sort(route.perm), ident)
    assert np.array_equal(route.inv[route.perm], ident)
    assert np.array_equal(invert(route), route.inv)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([ScanPattern.SNAKE, ScanPattern.SPIRAL, ScanPattern.DIAGONAL]), variants, grids)
def test_consecutive_cells_are_neighbours(pattern, variant, grid):
    report = adjacency_report(build_route(pattern, variant, grid))
    expected = AdjacencyMetric.CHEBYSHEV if pattern is ScanPattern.DIAGONAL else AdjacencyMetric.MANHATTAN
    assert report.metric is expected
    assert report.is_adjacent


def test_raster_row_wraps_are_reported():
    report = adjacency_report(build_route("raster", 0, GridShape(3, 4)))
    assert [v.step for v in report.violations] == [4, 8]
    assert report.max_distance == 4


@settings(max_examples=100, deadline=None)
@given(patterns, variants, grids)
def test_variant_starts_at_its_corner(pattern, variant, grid):
    route = build_route(pattern, variant, grid)
    corners = {
        RouteVariant.TOP_LEFT: (0, 0),
        RouteVariant.TOP_RIGHT: (0, grid.W - 1),
        RouteVariant.BOTTOM_LEFT: (grid.H - 1, 0),
        RouteVariant.BOTTOM_RIGHT: (grid.H - 1, grid.W - 1),
    }
    assert grid.cell(int(route.perm[0])) == corners[variant]


@pytest.mark.parametrize("pattern", list(ScanPattern))
@pytest.mark.parametrize("variant", [1, 2, 3])
def test_variant_is_reflected_variant_zero(pattern, variant):
    flip_rows, flip_cols = {1: (False, True), 2: (True, False), 3: (True, True)}[variant]
    for H in range(1, 7):
        for W in range(1, 7):
            grid = GridShape(H, W)
            base = build_route(pattern, 0, grid).perm
            r, c = base // W, base % W
            r = H - 1 - r if flip_rows else r
            c = W - 1 - c if flip_cols else c
            assert np.array_equal(build_route(pattern, variant, grid).perm, r * W + c), (H, W)


def test_route_set_takes_first_k_variants():
    routes = route_set("spiral", GridShape(3, 4), 2)
    assert [int(r.variant) for r in routes] == [0, 1]
    with pytest.raises(ValueError):
        route_set("spiral", GridShape(3, 4), 5)


def test_route_symmetry_only_on_a_single_cell():
    assert routes_share_layout(route_set("snake", GridShape(1, 1)))
    assert not routes_share_layout(route_set("snake", GridShape(2, 2)))


def test_from_perm_rejects_non_permutation():
    with pytest.raises(ContractError):
        ScanRoute.from_perm(ScanPattern.RASTER, 0, GridShape(2, 2), [0, 1, 1, 3])
    with pytest.raises(DimensionError):
        ScanRoute.from_perm(ScanPattern.RASTER, 0, GridShape(2, 2), [0, 1, 2])


# ---------------------------------------------------------------------------
# Gather / scatter
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(patterns, variants, grids, st.integers(0, 2**31 - 1))
def test_scatter_inverts_gather(pattern, variant, grid, seed):
    route = build_route(pattern, variant, grid)
    x = np.random.default_rng(seed).standard_normal((2, 3, grid.H, grid.W))
    seq = gather_sequence(x, route)
    assert seq.shape == (2, 3, grid.L)
    assert np.array_equal(scatter_section(seq, route), x.reshape(2, 3, grid.L))


def test_gather_reads_along_the_route():
    x = np.arange(9, dtype=np.float64).reshape(1, 1, 3, 3)
    seq = gather_sequence(x, build_route("spiral", 0, GridShape(3, 3)))
    assert seq[0, 0].tolist() == [0, 1, 2, 5, 8, 7, 6, 3, 4]


def test_fused_gather_matches_per_route():
    grid = GridShape(4, 5)
    routes = route_set("diagonal", grid)
    x = np.random.default_rng(3).standard_normal((2, 3, 4, 5))
    fused = gather_routes(x, routes)
    assert fused.shape == (2, 4, 3, 20)
    for k, route in enumerate(routes):
        assert np.array_equal(fused[:, k], gather_sequence(x, route))
    sections = scatter_routes(fused, routes)
    for k in range(4):
        assert np.array_equal(sections[:, k], x.reshape(2, 3, 20))


def test_gather_rejects_wrong_grid():
    with pytest.raises(DimensionError):
        gather_sequence(np.zeros((1, 2, 3, 3)), build_route("raster", 0, GridShape(2, 3)))
    with pytest.raises(DimensionError):
        scatter_section(np.zeros((1, 5)), build_route("raster", 0, GridShape(2, 3)))


# ---------------------------------------------------------------------------
# Dump and renderings
# ---------------------------------------------------------------------------

def test_dump_format():
    route = build_route("spiral", 0, GridShape(3, 3))
    assert dump_route(route) == "spiral 0 3 3\n0 1 2 5 8 7 6 3 4\n"


@settings(max_examples=50, deadline=None)
@given(patterns, variants, grids)
def test_dump_parses_back(pattern, variant, grid):
    route = build_route(pattern, variant, grid)
    assert parse_route_dump(dump_route(route)) == route


def test_parse_rejects_malformed_dump():
    with pytest.raises(ValueError):
        parse_route_dump("spiral 0 3\n0 1 2")
    with pytest.raises(ContractError):
        parse_route_dump("raster 0 1 2\n0 0")


def test_ascii_rendering():
    assert render_ascii(build_route("raster", 0, GridShape(2, 2))) == "0 1\n2 3\n"
    assert render_route(build_route("snake", 0, GridShape(2, 2)), "ascii") == "0 1\n3 2\n"


def test_svg_matches_golden():
    route = build_route("snake", 0, GridShape(2, 3))
    assert render_svg(route) == (GOLDEN / "snake_0_2_3.svg").read_text(encoding="utf-8")


def test_svg_is_deterministic():
    route = build_route("diagonal", 2, GridShape(4, 3))
    assert render_route(route, "svg") == render_route(route, "svg")
