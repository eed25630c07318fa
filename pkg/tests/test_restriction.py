import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridguide.geometry import GridGeometry, default_geometry
from gridguide.restriction import (CellRect, ImplicitCurveSpec, MapGenerationError,
                                   MotionRestrictionMap, PgmError, RegionInequalitySpec,
                                   Stroke, edit_region, load_pgm, map_from_implicit,
                                   map_from_inequalities, rom_from_trace, store_pgm)

from oracles import fan_fill_brute, stroke_cells_brute


def small_geom(w=60, h=50, res=1.0):
    return GridGeometry(w, h, res, (-(w // 2) * res, -(h // 2) * res))


# --- implicit / inequality generation ---------------------------------------

def test_circle_band_contains_exactly_the_band_cells():
    geom = default_geometry()
    spec = ImplicitCurveSpec(lambda x, y: x ** 2 + y ** 2 - 250.0 ** 2, 500.0)
    m = map_from_implicit(spec, geom)
    ys, xs = np.nonzero(m.cells)
    assert len(xs) > 0
    wx = geom.origin[0] + xs * geom.resolution
    wy = geom.origin[1] + ys * geom.resolution
    f = wx ** 2 + wy ** 2 - 250.0 ** 2
    assert (np.abs(f) < 500.0).all()
    radii = np.hypot(wx, wy)
    assert radii.min() > 248.0 and radii.max() < 252.0
    # prohibited cells all fail the predicate (exhaustive complement check)
    ys0, xs0 = np.nonzero(m.cells == 0)
    wx0 = geom.origin[0] + xs0 * geom.resolution
    wy0 = geom.origin[1] + ys0 * geom.resolution
    assert (np.abs(wx0 ** 2 + wy0 ** 2 - 250.0 ** 2) >= 500.0).all()


def test_zero_function_permits_everything():
    geom = small_geom()
    m = map_from_implicit(ImplicitCurveSpec(lambda x, y: x * 0.0, 1.0), geom)
    assert m.permitted_count() == geom.width_cells * geom.height_cells


def test_quartic_band_shape():
    # x^4 - x^2 + y^2 = 0 scaled to a +-100 mm figure: lobes reach (+-100, 0).
    geom = default_geometry()
    f = lambda x, y: (x / 100.0) ** 4 - (x / 100.0) ** 2 + (y / 100.0) ** 2
    m = map_from_implicit(ImplicitCurveSpec(f, 0.02), geom)
    assert m.is_permitted(*geom.world_to_cell(100.0, 0.0))
    assert m.is_permitted(*geom.world_to_cell(-100.0, 0.0))
    assert m.is_permitted(*geom.world_to_cell(0.0, 0.0))
    assert m.is_permitted(*geom.world_to_cell(70.0, 50.0))  # on the upper lobe
    assert not m.is_permitted(*geom.world_to_cell(200.0, 0.0))
    assert not m.is_permitted(*geom.world_to_cell(0.0, 100.0))


def test_non_finite_value_names_the_cell():
    geom = small_geom(8, 8)
    with np.errstate(invalid="ignore"):
        with pytest.raises(MapGenerationError, match=r"cell \("):
            map_from_implicit(ImplicitCurveSpec(lambda x, y: np.sqrt(x), 1.0), geom)


def test_inequality_disk_matches_predicate():
    geom = default_geometry()
    spec = RegionInequalitySpec([lambda x, y: x ** 2 + y ** 2 - 140.0 ** 2])
    m = map_from_inequalities(spec, geom)
    area = m.permitted_count() * geom.resolution ** 2
    assert math.isclose(area, math.pi * 140.0 ** 2, rel_tol=0.01)
    for (wx, wy), expect in [((0, 0), True), ((139, 0), True), ((100, 97), True),
                             ((141, 0), False), ((100, 99), False)]:
        assert m.is_permitted(*geom.world_to_cell(wx, wy)) == expect


def test_inequality_constants():
    geom = small_geom()
    assert map_from_inequalities(
        RegionInequalitySpec([lambda x, y: x * 0 + 1.0]), geom).permitted_count() == 0
    full = map_from_inequalities(RegionInequalitySpec([lambda x, y: x * 0 - 1.0]), geom)
    assert full.permitted_count() == geom.width_cells * geom.height_cells


def test_inequality_multiple_components_intersect():
    geom = small_geom()
    spec = RegionInequalitySpec([lambda x, y: x - 5.0, lambda x, y: -x - 5.0,
                                 lambda x, y: np.abs(y) - 3.0])
    m = map_from_inequalities(spec, geom)
    ys, xs = np.nonzero(m.cells)
    wx = geom.origin[0] + xs
    wy = geom.origin[1] + ys
    assert (np.abs(wx) < 5.0).all() and (np.abs(wy) < 3.0).all()


# --- range-of-motion fan fill -------------------------------------------------

def _cells_set(m):
    ys, xs = np.nonzero(m.cells)
    return set(zip(xs.tolist(), ys.tolist()))


@pytest.mark.parametrize("trace_cells", [
    [(5, 5), (40, 8), (42, 38), (8, 35), (5, 5)],          # square-ish loop
    [(10, 10), (50, 12), (30, 44)],                        # plain triangle
    [(4, 4), (50, 40), (25, 22), (12, 30), (45, 8)],       # self-crossing fan
])
def test_rom_matches_point_in_polygon_oracle(trace_cells):
    geom = small_geom()
    trace_world = [geom.cell_to_world(cx, cy) for cx, cy in trace_cells]
    m = rom_from_trace(trace_world, geom)
    expected = fan_fill_brute(trace_cells, geom.width_cells, geom.height_cells)
    assert _cells_set(m) == expected


def test_rom_collinear_trace_marks_the_line():
    geom = small_geom()
    m = rom_from_trace([geom.cell_to_world(5, 10), geom.cell_to_world(20, 10),
                        geom.cell_to_world(35, 10)], geom)
    got = _cells_set(m)
    assert got == {(x, 10) for x in range(5, 36)}


def test_rom_needs_three_points():
    geom = small_geom()
    with pytest.raises(ValueError):
        rom_from_trace([(0.0, 0.0), (1.0, 1.0)], geom)


# --- edits ---------------------------------------------------------------------

def test_rect_edit_sets_exactly_the_block_and_is_reversible():
    geom = small_geom()
    m = MotionRestrictionMap.empty(geom)
    edit_region(m, CellRect(10, 12, 19, 21), 255)
    assert m.permitted_count() == 100
    assert m.revision == 1
    edit_region(m, CellRect(10, 12, 19, 21), 0)
    assert m.permitted_count() == 0
    assert m.revision == 2


def test_rect_edit_clips_to_grid():
    geom = small_geom(20, 20)
    m = MotionRestrictionMap.empty(geom)
    edit_region(m, CellRect(-5, -5, 3, 3), 255)
    assert m.permitted_count() == 16


@given(st.integers(5, 50), st.integers(5, 40), st.integers(0, 8), st.integers(0, 8))
@settings(max_examples=25, deadline=None)
def test_rect_edit_touches_only_inside(x0, y0, dw, dh):
    geom = small_geom()
    m = MotionRestrictionMap.empty(geom)
    m.cells[:] = 7  # sentinel background
    edit_region(m, CellRect(x0, y0, min(x0 + dw, 59), min(y0 + dh, 49)), 255)
    outside = m.cells.copy()
    outside[y0:y0 + dh + 1, x0:x0 + dw + 1] = 7
    assert (outside == 7).all()


def test_stroke_matches_distance_oracle():
    geom = small_geom(40, 30)
    m = MotionRestrictionMap.empty(geom)
    pts = [geom.cell_to_world(5, 5), geom.cell_to_world(30, 9), geom.cell_to_world(33, 25)]
    edit_region(m, Stroke(pts, width_cells=3.0), 255)
    assert _cells_set(m) == stroke_cells_brute(pts, 3.0, geom)


# --- PGM ------------------------------------------------------------------------

def test_pgm_roundtrip_identity(tmp_path):
    rng = np.random.default_rng(5)
    geom = small_geom(37, 23)
    m = MotionRestrictionMap(geom, rng.integers(0, 256, (23, 37), dtype=np.uint8))
    p = tmp_path / "m.pgm"
    store_pgm(m, p)
    m2 = load_pgm(p, geom.resolution, geom.origin)
    assert (m2.cells == m.cells).all()
    p2 = tmp_path / "again.pgm"
    store_pgm(m2, p2)
    assert p.read_bytes() == p2.read_bytes()


def test_pgm_zero_is_prohibited_any_nonzero_permitted(tmp_path):
    geom = small_geom(3, 1)
    m = MotionRestrictionMap(geom, np.array([[0, 1, 255]], dtype=np.uint8))
    p = tmp_path / "v.pgm"
    store_pgm(m, p)
    m2 = load_pgm(p)
    assert not m2.is_permitted(0, 0)
    assert m2.is_permitted(1, 0)
    assert m2.is_permitted(2, 0)


def test_pgm_header_with_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# a comment\n4 2\n# another\n255\n" + bytes(8))
    m = load_pgm(p)
    assert (m.geometry.width_cells, m.geometry.height_cells) == (4, 2)


@pytest.mark.parametrize("blob", [
    b"P2\n2 2\n255\n....",          # ascii magic
    b"P5\n2 2\n70000\n" + bytes(4),  # maxval too large
    b"P5\n2 2\n255\n\x00",           # truncated pixels
    b"P5\n-3 2\n255\n",              # bad dimension token
    b"P5\n999999 999999\n255\n",     # dimension overflow
])
def test_pgm_malformed_rejected(tmp_path, blob):
    p = tmp_path / "bad.pgm"
    p.write_bytes(blob)
    with pytest.raises(PgmError):
        load_pgm(p)


@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20, deadline=None)
def test_pgm_roundtrip_random_maps(w, h, seed):
    import io
    rng = np.random.default_rng(seed)
    cells = rng.integers(0, 256, (h, w), dtype=np.uint8)
    geom = GridGeometry(w, h, 1.0)
    m = MotionRestrictionMap(geom, cells)
    import tempfile, os
    fd, path = tempfile.mkstemp(suffix=".pgm")
    os.close(fd)
    try:
        store_pgm(m, path)
        back = load_pgm(path)
        assert (back.cells == cells).all()
    finally:
        os.unlink(path)
