"""Task-space discretization: grid geometry and world <-> cell conversions.

World coordinates are millimeters throughout the package. A grid cell is
addressed as integer ``(cx, cy)`` with ``cx`` along +x (columns) and ``cy``
along +y (rows); row 0 is the smallest y. ``origin`` is the world coordinate
of the *center* of cell (0, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GridGeometry:
    """Uniform square-cell discretization of a rectangular 2-D task space."""

    width_cells: int
    height_cells: int
    resolution: float  # mm per cell
    origin: tuple[float, float] = (0.0, 0.0)  # world mm of cell (0,0) center

    def __post_init__(self) -> None:
        if self.width_cells < 1 or self.height_cells < 1:
            raise ValueError("grid must be at least 1x1 cells")
        if not (self.resolution > 0.0 and math.isfinite(self.resolution)):
            raise ValueError(f"resolution must be positive, got {self.resolution}")

    def cell_to_world(self, cx: float, cy: float) -> tuple[float, float]:
        """World mm of a cell center (fractional cells allowed)."""
        return (self.origin[0] + cx * self.resolution,
                self.origin[1] + cy * self.resolution)

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        """Nearest cell to a world point. May be out of bounds; see in_bounds."""
        inv = 1.0 / self.resolution
        return (math.floor((x - self.origin[0]) * inv + 0.5),
                math.floor((y - self.origin[1]) * inv + 0.5))

    def in_bounds(self, cx: int, cy: int) -> bool:
        return 0 <= cx < self.width_cells and 0 <= cy < self.height_cells

    @property
    def world_width(self) -> float:
        return self.width_cells * self.resolution

    @property
    def world_height(self) -> float:
        return self.height_cells * self.resolution

    def clamp_world(self, x: float, y: float) -> tuple[float, float]:
        """Clamp a world point onto the span of cell centers."""
        x0, y0 = self.origin
        return (min(max(x, x0), x0 + (self.width_cells - 1) * self.resolution),
                min(max(y, y0), y0 + (self.height_cells - 1) * self.resolution))


def default_geometry() -> GridGeometry:
    """650 x 550 mm workspace at 1 mm/cell, centered on the world origin.

    Cell centers land on integer millimeter coordinates, which keeps
    hand-written fixtures exact.
    """
    return GridGeometry(650, 550, 1.0, (-325.0, -275.0))


def benchmark_geometry() -> GridGeometry:
    """High-resolution 2200 x 1700 discretization used by the complexity bench."""
    res = 650.0 / 2200.0
    return GridGeometry(2200, 1700, res, (-325.0, -0.5 * 1699 * res))
