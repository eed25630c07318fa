"""Motion restriction maps: byte-valued occupancy grids over the task space.

A cell value of 0 marks a prohibited location; any non-zero value marks a
permitted one. Maps are generated from implicit curves, inequality systems,
or recorded motion traces, edited with rectangle/stroke tools, and stored as
binary (P5) PGM images so ordinary image editors can produce them too.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import GridGeometry

PERMITTED: int = 255
PROHIBITED: int = 0

# Guard against absurd PGM headers before allocating.
_MAX_PGM_CELLS = 100_000_000


class MapGenerationError(ValueError):
    """Raised when a generator cannot evaluate its function on the grid."""


class PgmError(ValueError):
    """Raised for malformed PGM files."""


@dataclass
class ImplicitCurveSpec:
    """Trajectory band ``|f(x, y)| < band_halfwidth`` around an implicit curve.

    ``f`` takes world coordinates in mm (scalars or numpy arrays) and
    ``band_halfwidth`` is compared against ``|f|`` in f's own output units.
    """

    f: Callable
    band_halfwidth: float

    def __post_init__(self) -> None:
        if not self.band_halfwidth > 0:
            raise ValueError("band_halfwidth must be positive")


@dataclass
class RegionInequalitySpec:
    """Permitted region where every component of ``components`` is < 0."""

    components: Sequence[Callable]


@dataclass
class MotionRestrictionMap:
    """W x H occupancy grid; ``cells[cy, cx]`` is the value at cell (cx, cy)."""

    geometry: GridGeometry
    cells: np.ndarray
    revision: int = 0

    def __post_init__(self) -> None:
        expected = (self.geometry.height_cells, self.geometry.width_cells)
        if self.cells.shape != expected:
            raise ValueError(f"cells shape {self.cells.shape} != {expected}")
        if self.cells.dtype != np.uint8:
            self.cells = self.cells.astype(np.uint8)

    @classmethod
    def empty(cls, geometry: GridGeometry) -> "MotionRestrictionMap":
        """All-prohibited map (the documented initial state)."""
        return cls(geometry, np.zeros((geometry.height_cells, geometry.width_cells), np.uint8))

    def is_permitted(self, cx: int, cy: int) -> bool:
        """Occupancy query; out-of-bounds cells are prohibited."""
        if not self.geometry.in_bounds(cx, cy):
            return False
        return self.cells[cy, cx] != 0

    def permitted_mask(self) -> np.ndarray:
        return self.cells != 0

    def permitted_count(self) -> int:
        return int(np.count_nonzero(self.cells))

    def copy(self) -> "MotionRestrictionMap":
        return MotionRestrictionMap(self.geometry, self.cells.copy(), self.revision)


def _world_grids(geom: GridGeometry) -> tuple[np.ndarray, np.ndarray]:
    xs = geom.origin[0] + np.arange(geom.width_cells) * geom.resolution
    ys = geom.origin[1] + np.arange(geom.height_cells) * geom.resolution
    return np.meshgrid(xs, ys)


def _check_finite(values: np.ndarray, geom: GridGeometry, what: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        cy, cx = np.argwhere(bad)[0]
        x, y = geom.cell_to_world(int(cx), int(cy))
        raise MapGenerationError(
            f"{what} is non-finite at cell ({int(cx)}, {int(cy)}) = world ({x:g}, {y:g}) mm")


def map_from_implicit(spec: ImplicitCurveSpec, geom: GridGeometry) -> MotionRestrictionMap:
    """Permit every cell whose center satisfies ``|f| < band_halfwidth``."""
    xg, yg = _world_grids(geom)
    values = np.asarray(spec.f(xg, yg), dtype=float)
    values = np.broadcast_to(values, xg.shape)
    _check_finite(values, geom, "implicit function")
    cells = np.where(np.abs(values) < spec.band_halfwidth, PERMITTED, PROHIBITED)
    return MotionRestrictionMap(geom, cells.astype(np.uint8))


def map_from_inequalities(spec: RegionInequalitySpec, geom: GridGeometry) -> MotionRestrictionMap:
    """Permit cells where all inequality components evaluate < 0."""
    xg, yg = _world_grids(geom)
    permitted = np.ones(xg.shape, dtype=bool)
    for k, component in enumerate(spec.components):
        values = np.broadcast_to(np.asarray(component(xg, yg), dtype=float), xg.shape)
        _check_finite(values, geom, f"inequality component {k}")
        permitted &= values < 0.0
    cells = np.where(permitted, PERMITTED, PROHIBITED)
    return MotionRestrictionMap(geom, cells.astype(np.uint8))


def _rasterize_triangle(mask: np.ndarray, geom: GridGeometry,
                        a: tuple[float, float], b: tuple[float, float],
                        c: tuple[float, float]) -> None:
    """Mark cells whose center lies inside or on the triangle (inclusive fill).

    Uses half-plane sign tests so degenerate (collinear) triangles mark the
    cells on their edges.
    """
    res = geom.resolution
    ox, oy = geom.origin
    # Bounding box in cell indices, clamped to the grid.
    xs = [a[0], b[0], c[0]]
    ys = [a[1], b[1], c[1]]
    cx0 = max(0, int(np.floor((min(xs) - ox) / res)))
    cx1 = min(geom.width_cells - 1, int(np.ceil((max(xs) - ox) / res)))
    cy0 = max(0, int(np.floor((min(ys) - oy) / res)))
    cy1 = min(geom.height_cells - 1, int(np.ceil((max(ys) - oy) / res)))
    if cx1 < cx0 or cy1 < cy0:
        return

    px = ox + np.arange(cx0, cx1 + 1) * res
    py = oy + np.arange(cy0, cy1 + 1) * res
    xg, yg = np.meshgrid(px, py)

    def edge(p, q):
        return (q[0] - p[0]) * (yg - p[1]) - (q[1] - p[1]) * (xg - p[0])

    e0, e1, e2 = edge(a, b), edge(b, c), edge(c, a)
    inside = ((e0 >= 0) & (e1 >= 0) & (e2 >= 0)) | ((e0 <= 0) & (e1 <= 0) & (e2 <= 0))
    if inside.any():
        region = mask[cy0:cy1 + 1, cx0:cx1 + 1]
        region |= inside


def rom_from_trace(trace: Sequence[tuple[float, float]],
                   geom: GridGeometry) -> MotionRestrictionMap:
    """Range-of-motion map: union of triangles fanned from the trace start.

    Every triangle (trace[0], trace[k], trace[k+1]) is filled inclusively, so
    the traced boundary itself ends up permitted.
    """
    if len(trace) < 3:
        raise ValueError(f"trace needs at least 3 points, got {len(trace)}")
    mask = np.zeros((geom.height_cells, geom.width_cells), dtype=bool)
    anchor = (float(trace[0][0]), float(trace[0][1]))
    for k in range(1, len(trace) - 1):
        _rasterize_triangle(mask, geom, anchor,
                            (float(trace[k][0]), float(trace[k][1])),
                            (float(trace[k + 1][0]), float(trace[k + 1][1])))
    return MotionRestrictionMap(geom, np.where(mask, PERMITTED, PROHIBITED).astype(np.uint8))


@dataclass
class CellRect:
    """Inclusive cell-index rectangle [x0..x1] x [y0..y1]."""

    x0: int
    y0: int
    x1: int
    y1: int

    def normalized(self) -> "CellRect":
        return CellRect(min(self.x0, self.x1), min(self.y0, self.y1),
                        max(self.x0, self.x1), max(self.y0, self.y1))


@dataclass
class Stroke:
    """Polyline of world points widened to ``width_cells`` cells."""

    points: Sequence[tuple[float, float]]
    width_cells: float = 3.0


def _apply_stroke(m: MotionRestrictionMap, stroke: Stroke, value: int) -> None:
    geom = m.geometry
    res = geom.resolution
    half = 0.5 * stroke.width_cells * res
    pts = [np.asarray(p, dtype=float) for p in stroke.points]
    if len(pts) == 1:
        pts = pts * 2
    for p, q in zip(pts[:-1], pts[1:]):
        lo = np.minimum(p, q) - half
        hi = np.maximum(p, q) + half
        cx0 = max(0, int(np.floor((lo[0] - geom.origin[0]) / res)))
        cx1 = min(geom.width_cells - 1, int(np.ceil((hi[0] - geom.origin[0]) / res)))
        cy0 = max(0, int(np.floor((lo[1] - geom.origin[1]) / res)))
        cy1 = min(geom.height_cells - 1, int(np.ceil((hi[1] - geom.origin[1]) / res)))
        if cx1 < cx0 or cy1 < cy0:
            continue
        xs = geom.origin[0] + np.arange(cx0, cx1 + 1) * res
        ys = geom.origin[1] + np.arange(cy0, cy1 + 1) * res
        xg, yg = np.meshgrid(xs, ys)
        d = q - p
        len2 = float(d @ d)
        if len2 == 0.0:
            dist2 = (xg - p[0]) ** 2 + (yg - p[1]) ** 2
        else:
            t = np.clip(((xg - p[0]) * d[0] + (yg - p[1]) * d[1]) / len2, 0.0, 1.0)
            dist2 = (xg - (p[0] + t * d[0])) ** 2 + (yg - (p[1] + t * d[1])) ** 2
        hit = dist2 <= half * half
        m.cells[cy0:cy1 + 1, cx0:cx1 + 1][hit] = value


def edit_region(m: MotionRestrictionMap, region: CellRect | Stroke,
                value: int = PERMITTED) -> None:
    """Set cells covered by a rectangle or stroke; out-of-grid parts are ignored.

    Bumps the map revision. The restriction controller needs no recompute
    after an edit; spring force maps do (see the impedance module).
    """
    if isinstance(region, CellRect):
        r = region.normalized()
        x0 = max(0, r.x0)
        y0 = max(0, r.y0)
        x1 = min(m.geometry.width_cells - 1, r.x1)
        y1 = min(m.geometry.height_cells - 1, r.y1)
        if x1 >= x0 and y1 >= y0:
            m.cells[y0:y1 + 1, x0:x1 + 1] = value
    elif isinstance(region, Stroke):
        _apply_stroke(m, region, value)
    else:
        raise TypeError(f"unsupported region type {type(region)!r}")
    m.revision += 1


# --- PGM (P5) serialization ------------------------------------------------

_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    match = _PGM_TOKEN.match(buf, pos)
    if not match:
        raise PgmError("truncated PGM header")
    return match.group(1), match.end()


def to_pgm_bytes(m: MotionRestrictionMap) -> bytes:
    """Canonical binary PGM: row 0 = smallest y, maxval 255."""
    header = f"P5\n{m.geometry.width_cells} {m.geometry.height_cells}\n255\n"
    return header.encode("ascii") + m.cells.tobytes()


def store_pgm(m: MotionRestrictionMap, path) -> None:
    with open(path, "wb") as fh:
        fh.write(to_pgm_bytes(m))


def from_pgm_bytes(buf: bytes, resolution: float = 1.0,
                   origin: tuple[float, float] | None = None) -> MotionRestrictionMap:
    """Parse a binary PGM blob as a restriction map.

    PGM carries no world metadata, so the caller supplies resolution and
    origin; the default origin centers the grid on integer-mm cell centers.
    """
    magic, pos = _read_token(buf, 0)
    if magic != b"P5":
        raise PgmError(f"not a binary PGM (magic {magic!r})")
    fields = []
    for _ in range(3):
        token, pos = _read_token(buf, pos)
        if not token.isdigit():
            raise PgmError(f"bad header token {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1 or width * height > _MAX_PGM_CELLS:
        raise PgmError(f"unreasonable dimensions {width}x{height}")
    if maxval <= 0 or maxval > 255:
        raise PgmError(f"maxval {maxval} out of byte range")
    pos += 1  # single whitespace byte after maxval
    data = buf[pos:pos + width * height]
    if len(data) != width * height:
        raise PgmError(f"pixel data truncated ({len(data)} of {width * height} bytes)")
    cells = np.frombuffer(data, dtype=np.uint8).reshape(height, width).copy()
    if origin is None:
        origin = (-(width // 2) * resolution, -(height // 2) * resolution)
    geom = GridGeometry(width, height, resolution, origin)
    return MotionRestrictionMap(geom, cells)


def load_pgm(path, resolution: float = 1.0,
             origin: tuple[float, float] | None = None) -> MotionRestrictionMap:
    with open(path, "rb") as fh:
        return from_pgm_bytes(fh.read(), resolution, origin)
