import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridguide.geometry import GridGeometry, default_geometry
from gridguide.impedance import (ConvolutionKernel, ExpandedMap, ImpedanceParams,
                                 SpringForceMap, StaleMapError, build_spring_map,
                                 depth_profile_1d, expand_map, impedance_step,
                                 load_spring_map, store_spring_map)
from gridguide.restriction import (MotionRestrictionMap, RegionInequalitySpec,
                                   map_from_inequalities)

from oracles import dilate_brute


def geom_of(w, h):
    return GridGeometry(w, h, 1.0, (-(w // 2) * 1.0, -(h // 2) * 1.0))


# --- kernel ---------------------------------------------------------------------

@pytest.mark.parametrize("r", [1, 3, 6, 11])
def test_kernel_normalized_and_symmetric(r):
    k = ConvolutionKernel(r)
    w = k.weights
    assert (w >= 0).all()
    assert abs(w.sum() - 1.0) < 1e-12
    assert np.array_equal(w, w[::-1, :])
    assert np.array_equal(w, w[:, ::-1])
    assert np.array_equal(w, w.T)
    assert k.tap_count == np.count_nonzero(w)


def test_kernel_rejects_bad_radius():
    with pytest.raises(ValueError):
        ConvolutionKernel(0)


# --- expansion -------------------------------------------------------------------

def test_expand_single_cell_gives_disk():
    g = geom_of(31, 31)
    m = MotionRestrictionMap.empty(g)
    m.cells[15, 15] = 255
    out = expand_map(m, ConvolutionKernel(6))
    ys, xs = np.nonzero(out.cells)
    got = set(zip(xs.tolist(), ys.tolist()))
    expected = {(15 + dx, 15 + dy) for dx in range(-6, 7) for dy in range(-6, 7)
                if dx * dx + dy * dy <= 36}
    assert got == expected


def test_expand_empty_and_full_unchanged():
    g = geom_of(20, 20)
    empty = MotionRestrictionMap.empty(g)
    assert expand_map(empty, ConvolutionKernel(3)).permitted_count() == 0
    full = MotionRestrictionMap(g, np.full((20, 20), 255, np.uint8))
    assert expand_map(full, ConvolutionKernel(3)).permitted_count() == 400


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 4))
@settings(max_examples=10, deadline=None)
def test_expand_matches_brute_dilation(seed, radius):
    rng = np.random.default_rng(seed)
    w, h = int(rng.integers(10, 30)), int(rng.integers(10, 30))
    m = MotionRestrictionMap(geom_of(w, h),
                             (rng.random((h, w)) < 0.15).astype(np.uint8) * 255)
    out = expand_map(m, ConvolutionKernel(radius))
    brute = dilate_brute(m.cells != 0, radius)
    assert [[bool(v) for v in row] for row in (out.cells != 0)] == brute


def test_expand_rejects_oversize_kernel():
    m = MotionRestrictionMap.empty(geom_of(10, 10))
    with pytest.raises(ValueError):
        expand_map(m, ConvolutionKernel(5))


# --- spring map construction --------------------------------------------------------

def build_point_attractor(radius_cells=20, size=101):
    g = geom_of(size, size)
    m = MotionRestrictionMap.empty(g)
    m.cells[size // 2, size // 2] = 255
    kernel = ConvolutionKernel(radius_cells)
    p = ImpedanceParams.for_geometry(g, spring_stiffness=0.1, kernel_radius=radius_cells)
    return build_spring_map(expand_map(m, kernel), kernel, p), p, g


def test_depth_plateaus_are_exact():
    spr, p, g = build_point_attractor()
    c = g.width_cells // 2
    assert spr.depth_at(c, c) == 0.0                      # fully permitted under the disk
    assert spr.depth_at(0, 0) == p.zone_width             # fully prohibited under the disk
    assert spr.depth.min() >= 0.0
    assert spr.depth.max() <= p.zone_width


def test_depth_zone_spans_kernel_diameter():
    spr, p, g = build_point_attractor(radius_cells=10, size=61)
    c = g.width_cells // 2
    prof = spr.depth[c, c:]
    inside = np.nonzero(prof == 0.0)[0]
    full = np.nonzero(prof == p.zone_width)[0]
    assert inside.max() == 0                  # only the center is depth 0
    assert full.min() == 2 * 10 + 1           # plateau starts past the zone
    mid = prof[1:2 * 10]
    assert ((mid > 0) & (mid < p.zone_width)).all()


def test_build_requires_matching_expansion():
    g = geom_of(21, 21)
    m = MotionRestrictionMap.empty(g)
    m.cells[10, 10] = 255
    k3, k4 = ConvolutionKernel(3), ConvolutionKernel(4)
    p3 = ImpedanceParams.for_geometry(g, 0.1, 3)
    with pytest.raises(StaleMapError):
        build_spring_map(expand_map(m, k4), k3, p3)  # wrong kernel pairing
    with pytest.raises(StaleMapError):
        build_spring_map(m, k3, p3)  # raw map, not expanded


def test_zone_width_consistency_enforced():
    with pytest.raises(ValueError):
        ImpedanceParams(0.1, zone_width=10.0, kernel_radius=6).validate_zone(1.0)


def test_fft_and_direct_paths_agree():
    from gridguide import impedance as imp
    g = geom_of(80, 60)
    rng = np.random.default_rng(3)
    m = MotionRestrictionMap(g, (rng.random((60, 80)) < 0.2).astype(np.uint8) * 255)
    kernel = ConvolutionKernel(5)
    p = ImpedanceParams.for_geometry(g, 0.1, 5)
    exp_m = expand_map(m, kernel)
    old = imp._FFT_WORK_THRESHOLD
    try:
        imp._FFT_WORK_THRESHOLD = 0  # force fft
        via_fft = build_spring_map(exp_m, kernel, p)
        imp._FFT_WORK_THRESHOLD = float("inf")  # force direct
        via_direct = build_spring_map(exp_m, kernel, p)
    finally:
        imp._FFT_WORK_THRESHOLD = old
    assert np.array_equal(via_fft.depth, via_direct.depth)


def test_depth_lipschitz_bound():
    spr, p, g = build_point_attractor(radius_cells=8, size=51)
    k = ConvolutionKernel(8)
    col_mass = k.weights.sum(axis=0).max()
    bound = p.zone_width * col_mass * (2 * 8 + 1)
    dx = np.abs(np.diff(spr.depth, axis=1)).max()
    dy = np.abs(np.diff(spr.depth, axis=0)).max()
    assert max(dx, dy) <= bound + 1e-12


# --- 1-D closed-form profile ----------------------------------------------------------

def test_profile_1d_matches_hand_derived_ramps():
    # permitted [2, 6], unit-width kernel: ramps on [1.5, 2.5] and [5.5, 6.5]
    xs = np.linspace(0.0, 8.0, 4001)
    got = depth_profile_1d(2.0, 6.0, 1.0, xs, zone_width=1.0)

    def closed_form(x):
        if x < 1.5 or x > 6.5:
            return 1.0
        if x < 2.5:
            return 2.5 - x
        if x <= 5.5:
            return 0.0
        return x - 5.5

    expected = np.array([closed_form(x) for x in xs])
    assert np.abs(got - expected).max() <= 1e-9


def test_profile_1d_scales_with_zone_width():
    assert depth_profile_1d(2.0, 6.0, 1.0, 1.0, zone_width=12.0) == 12.0
    assert depth_profile_1d(2.0, 6.0, 1.0, 4.0, zone_width=12.0) == 0.0


# --- force composition -------------------------------------------------------------

def flat_spring(depth_value=0.0, size=7):
    g = geom_of(size, size)
    return SpringForceMap(g, np.full((size, size), depth_value), zone_width=12.0)


def test_zero_depth_plateau_passes_force_through():
    spr = flat_spring(0.0)
    p = ImpedanceParams(0.1, 12.0, 6)
    assert impedance_step((3.0, -4.0), (50.0, 10.0), (3, 3), spr, p) == (3.0, -4.0)


def test_hand_built_ramp_adds_inward_spring():
    # depth rises 1 mm per cell toward +x: gradient (2, 0), direction (-1, 0).
    g = geom_of(7, 7)
    depth = np.tile(np.arange(7.0), (7, 1))
    spr = SpringForceMap(g, depth, zone_width=12.0)
    p = ImpedanceParams(spring_stiffness=0.1, zone_width=12.0, kernel_radius=6)
    f = impedance_step((1.0, 2.0), (0.0, 0.0), (3, 3), spr, p)
    assert math.isclose(f[0], 1.0 - 0.1 * 3.0)  # 0.3 N toward -x
    assert math.isclose(f[1], 2.0)


def test_damper_term_follows_assistance_direction():
    g = geom_of(7, 7)
    depth = np.tile(np.arange(7.0), (7, 1))
    spr = SpringForceMap(g, depth, zone_width=12.0)
    p = ImpedanceParams(0.0, 12.0, 6, damper_coeff=0.5)
    f = impedance_step((0.0, 0.0), (-10.0, 0.0), (3, 3), spr, p)
    # direction (-1, 0); v . dir = 10; term = 0.5 * 10 along (-1, 0)
    assert math.isclose(f[0], -5.0)
    assert f[1] == 0.0


def test_border_cells_are_clamped():
    spr = flat_spring(3.0)
    p = ImpedanceParams(0.1, 12.0, 6)
    out = impedance_step((1.0, 1.0), (0.0, 0.0), (0, 0), spr, p)
    assert np.isfinite(out).all()


def test_point_attractor_direction_is_radial():
    spr, p, g = build_point_attractor(radius_cells=20, size=101)
    c = g.width_cells // 2
    zone = 2 * 20
    worst = 0.0
    for r in range(3, zone - 2):
        for ang in np.linspace(0, 2 * math.pi, 17)[:-1]:
            cx = c + int(round(r * math.cos(ang)))
            cy = c + int(round(r * math.sin(ang)))
            f = impedance_step((0.0, 0.0), (0.0, 0.0), (cx, cy), spr, p)
            if f == (0.0, 0.0):
                continue
            to_center = np.array([c - cx, c - cy], dtype=float)
            to_center /= np.linalg.norm(to_center)
            fdir = np.array(f) / np.linalg.norm(f)
            worst = max(worst, math.degrees(math.acos(np.clip(fdir @ to_center, -1, 1))))
    assert worst <= 5.0


def test_equal_radii_equal_depth_within_quantization():
    spr, p, g = build_point_attractor(radius_cells=20, size=101)
    c = g.width_cells // 2
    col_mass = ConvolutionKernel(20).weights.sum(axis=0).max()
    step_bound = p.zone_width * col_mass  # max change from a one-cell move
    for r in (5, 12, 20, 30):
        vals = []
        for ang in np.linspace(0, 2 * math.pi, 33)[:-1]:
            cx = c + r * math.cos(ang)
            cy = c + r * math.sin(ang)
            vals.append(spr.depth_at(int(round(cx)), int(round(cy))))
        # radius quantization moves the sample point by up to ~0.71 cells
        assert max(vals) - min(vals) <= 2.0 * step_bound + 1e-12


# --- serialization ------------------------------------------------------------------

def test_spring_map_file_roundtrip(tmp_path):
    spr, p, g = build_point_attractor(radius_cells=6, size=31)
    path = tmp_path / "s.bin"
    store_spring_map(spr, path)
    back = load_spring_map(path, g.resolution, g.origin)
    assert back.zone_width == spr.zone_width
    assert np.allclose(back.depth, spr.depth, atol=1e-5)  # float32 storage
    assert path.stat().st_size == 16 + 4 * 31 * 31


def test_spring_map_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + bytes(12))
    with pytest.raises(ValueError):
        load_spring_map(path)
