"""Independent brute-force oracles used by module and acceptance tests.

These deliberately avoid the library's own code paths: plain Python loops,
exact integer arithmetic where the geometry allows it.
"""

from __future__ import annotations

import math


def ring_offsets_brute(radius: int, box: int | None = None) -> set[tuple[int, int]]:
    """All integer offsets with |dx^2 + dy^2 - R^2| < 2R, by enumeration."""
    if radius < 1:
        return set()
    half = box if box is not None else radius + 5
    out = set()
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            if abs(dx * dx + dy * dy - radius * radius) < 2 * radius:
                out.add((dx, dy))
    return out


def annulus_candidates_brute(cells, radius: int, px: int, py: int) -> set[tuple[int, int]]:
    """Scan every grid cell; keep permitted cells passing the ring test."""
    h, w = cells.shape
    out = set()
    for cy in range(h):
        for cx in range(w):
            if cells[cy, cx] == 0:
                continue
            dx = cx - px
            dy = cy - py
            if abs(dx * dx + dy * dy - radius * radius) < 2 * radius:
                out.add((cx, cy))
    return out


def point_in_triangle_inclusive(px: int, py: int, tri) -> bool:
    """Exact integer sign test: inside or on the boundary of the triangle.

    The bounding-box guard keeps degenerate (collinear) triangles from
    matching their whole infinite line.
    """
    (ax, ay), (bx, by), (cx, cy) = tri
    if not (min(ax, bx, cx) <= px <= max(ax, bx, cx)
            and min(ay, by, cy) <= py <= max(ay, by, cy)):
        return False
    d0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    d1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    d2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    neg = d0 < 0 or d1 < 0 or d2 < 0
    pos = d0 > 0 or d1 > 0 or d2 > 0
    return not (neg and pos)


def fan_fill_brute(trace_cells, width: int, height: int) -> set[tuple[int, int]]:
    """Union of fan triangles from trace_cells[0], tested per cell center.

    Coordinates must be integers so the sign tests are exact.
    """
    anchor = trace_cells[0]
    tris = [(anchor, trace_cells[k], trace_cells[k + 1])
            for k in range(1, len(trace_cells) - 1)]
    out = set()
    for cy in range(height):
        for cx in range(width):
            for tri in tris:
                if point_in_triangle_inclusive(cx, cy, tri):
                    out.add((cx, cy))
                    break
    return out


def dilate_brute(mask, radius: int):
    """Morphological dilation by the disk dx^2 + dy^2 <= r^2, plain loops."""
    h, w = mask.shape
    out = [[False] * w for _ in range(h)]
    disk = [(dx, dy) for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1)
            if dx * dx + dy * dy <= radius * radius]
    for cy in range(h):
        for cx in range(w):
            if not mask[cy, cx]:
                continue
            for dx, dy in disk:
                x, y = cx + dx, cy + dy
                if 0 <= x < w and 0 <= y < h:
                    out[y][x] = True
    return out


def stroke_cells_brute(points, width_cells: float, geom) -> set[tuple[int, int]]:
    """Cells whose center is within width/2 of the polyline, by per-cell test."""
    half = 0.5 * width_cells * geom.resolution
    segs = list(zip(points[:-1], points[1:])) or [(points[0], points[0])]
    out = set()
    for cy in range(geom.height_cells):
        for cx in range(geom.width_cells):
            x, y = geom.cell_to_world(cx, cy)
            for (p, q) in segs:
                d = _dist_point_segment(x, y, p, q)
                if d <= half:
                    out.add((cx, cy))
                    break
    return out


def _dist_point_segment(x, y, p, q) -> float:
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        return math.hypot(x - px, y - py)
    t = max(0.0, min(1.0, ((x - px) * dx + (y - py) * dy) / len2))
    return math.hypot(x - (px + t * dx), y - (py + t * dy))


def nearest_permitted_distance_brute(cells, geom, x: float, y: float) -> float:
    """Distance to the nearest permitted cell center; 0 if own cell permitted."""
    cx, cy = geom.world_to_cell(x, y)
    if 0 <= cx < geom.width_cells and 0 <= cy < geom.height_cells and cells[cy, cx]:
        return 0.0
    best = math.inf
    for iy in range(geom.height_cells):
        for ix in range(geom.width_cells):
            if cells[iy, ix]:
                wx, wy = geom.cell_to_world(ix, iy)
                best = min(best, math.hypot(x - wx, y - wy))
    return best
