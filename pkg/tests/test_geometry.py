import math

import pytest
from hypothesis import given, strategies as st

from gridguide.geometry import GridGeometry, benchmark_geometry, default_geometry


def test_cell_world_roundtrip_exact_on_centers():
    g = GridGeometry(100, 80, 2.0, (-50.0, -30.0))
    for cx, cy in [(0, 0), (99, 79), (13, 42)]:
        x, y = g.cell_to_world(cx, cy)
        assert g.world_to_cell(x, y) == (cx, cy)


@given(st.floats(-324.9, 324.4), st.floats(-274.9, 274.4))
def test_quantization_within_half_cell(x, y):
    g = default_geometry()
    cx, cy = g.world_to_cell(x, y)
    assert g.in_bounds(cx, cy)
    wx, wy = g.cell_to_world(cx, cy)
    assert abs(wx - x) <= g.resolution / 2 + 1e-9
    assert abs(wy - y) <= g.resolution / 2 + 1e-9


def test_default_geometry_spans_workspace():
    g = default_geometry()
    assert (g.world_width, g.world_height) == (650.0, 550.0)
    assert g.world_to_cell(0.0, 0.0) == (325, 275)


def test_benchmark_geometry_preset():
    g = benchmark_geometry()
    assert (g.width_cells, g.height_cells) == (2200, 1700)
    assert math.isclose(g.resolution, 650.0 / 2200.0)


@pytest.mark.parametrize("w,h,res", [(0, 10, 1.0), (10, 0, 1.0), (10, 10, 0.0),
                                     (10, 10, -1.0), (10, 10, float("nan"))])
def test_invalid_geometry_rejected(w, h, res):
    with pytest.raises(ValueError):
        GridGeometry(w, h, res)


def test_out_of_bounds_and_clamp():
    g = GridGeometry(10, 10, 1.0)
    assert not g.in_bounds(-1, 0)
    assert not g.in_bounds(0, 10)
    assert g.clamp_world(100.0, -5.0) == (9.0, 0.0)
