"""Motion restriction controller: implicit-Euler velocity control.

Instead of decomposing velocity against the local boundary tangent (which
accumulates discretization error into an outward drift), each step predicts
the reachable positions one lookahead ahead on a speed-proportional ring,
keeps the ring cells that fall on permitted map cells, and chases the one
best aligned with the current velocity. The commanded speed is the velocity
projection onto that direction, clamped at zero, so motion into a boundary
loses momentum instead of penetrating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .restriction import MotionRestrictionMap


@dataclass
class KinematicState:
    """End-effector position (world mm) and velocity (mm/s)."""

    position: tuple[float, float]
    velocity: tuple[float, float]


@dataclass(frozen=True)
class RingTemplate:
    """Integer cell offsets approximating a circle of a given cell radius.

    ``ux``/``uy`` are the precomputed unit directions of each offset; the
    chasing-direction candidates are exactly these, since candidate cells are
    reached by adding an offset to the current cell.
    """

    radius: int
    dx: np.ndarray  # int32
    dy: np.ndarray
    ux: np.ndarray  # float64 unit directions
    uy: np.ndarray

    def __len__(self) -> int:
        return len(self.dx)

    @property
    def offsets(self) -> list[tuple[int, int]]:
        return list(zip(self.dx.tolist(), self.dy.tolist()))


def _build_ring(radius: int) -> RingTemplate:
    if radius < 1:
        empty = np.zeros(0, dtype=np.int32)
        return RingTemplate(radius, empty, empty, empty.astype(float), empty.astype(float))
    span = np.arange(-radius - 5, radius + 6, dtype=np.int64)
    dxg, dyg = np.meshgrid(span, span, indexing="xy")
    # |(dx/R)^2 + (dy/R)^2 - 1| < 2/R, in exact integer form.
    keep = np.abs(dxg * dxg + dyg * dyg - radius * radius) < 2 * radius
    dx = dxg[keep].astype(np.int32)
    dy = dyg[keep].astype(np.int32)
    norm = np.sqrt((dx.astype(float)) ** 2 + (dy.astype(float)) ** 2)
    nz = norm > 0
    ux = np.where(nz, dx / np.where(nz, norm, 1.0), 0.0)
    uy = np.where(nz, dy / np.where(nz, norm, 1.0), 0.0)
    return RingTemplate(radius, dx, dy, ux, uy)


@dataclass
class IevcConfig:
    """Tuning for the restriction controller.

    ``lookahead_gain`` converts speed (mm/s) to ring radius (cells); with the
    default ``lookahead_s / resolution`` construction the ring radius equals
    the distance covered in one lookahead horizon. For confinement under hard
    braking the horizon should be at least v_max / a_max of the plant.
    """

    lookahead_gain: float  # cells per (mm/s)
    min_radius: int = 3
    _rings: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.lookahead_gain > 0:
            raise ValueError("lookahead_gain must be positive")
        if self.min_radius < 2:
            raise ValueError("min_radius must be >= 2")

    @classmethod
    def from_lookahead(cls, lookahead_s: float = 0.02, resolution: float = 1.0,
                       min_radius: int = 3) -> "IevcConfig":
        return cls(lookahead_gain=lookahead_s / resolution, min_radius=min_radius)

    def ring(self, radius: int) -> RingTemplate:
        """Cached ring template; repeated calls return the same object."""
        tpl = self._rings.get(radius)
        if tpl is None:
            tpl = _build_ring(radius)
            self._rings[radius] = tpl
        return tpl


def circle_map(radius: int, cfg: IevcConfig | None = None) -> RingTemplate:
    """Ring template for ``radius`` cells (cached per config)."""
    if cfg is None:
        cfg = _default_cfg
    return cfg.ring(radius)


_default_cfg = IevcConfig(lookahead_gain=0.02)


def find_intersections(m: MotionRestrictionMap, template: RingTemplate,
                       cell: tuple[int, int]) -> list[tuple[int, int]]:
    """Permitted in-bounds cells on the ring around ``cell``, in template order."""
    px, py = cell
    cx = template.dx + px
    cy = template.dy + py
    ok = (cx >= 0) & (cx < m.geometry.width_cells) & \
         (cy >= 0) & (cy < m.geometry.height_cells)
    ok[ok] = m.cells[cy[ok], cx[ok]] > 0
    return [(int(x), int(y)) for x, y in zip(cx[ok], cy[ok])]


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5))


# Candidates whose alignment is within this of the best count as ties;
# the first in template order wins, for reproducible runs.
_TIE_EPS = 1e-9


@dataclass
class IevcResult:
    velocity: tuple[float, float]  # mm/s
    stranded: bool = False
    radius: int = 0


def _scan(m: MotionRestrictionMap, tpl: RingTemplate, px: int, py: int,
          vx: float, vy: float) -> tuple[float, float, float] | None:
    """Best-aligned permitted ring cell; returns (proj, ux, uy) or None."""
    if len(tpl) == 0:
        return None
    w = m.geometry.width_cells
    h = m.geometry.height_cells
    cx = tpl.dx + px
    cy = tpl.dy + py
    if px - tpl.radius - 1 < 0 or px + tpl.radius + 1 >= w \
            or py - tpl.radius - 1 < 0 or py + tpl.radius + 1 >= h:
        ok = (cx >= 0) & (cx < w) & (cy >= 0) & (cy < h)
        ok[ok] = m.cells[cy[ok], cx[ok]] > 0
    else:
        ok = m.cells[cy, cx] > 0
    if not ok.any():
        return None
    proj = vx * tpl.ux + vy * tpl.uy
    masked = np.where(ok, proj, -np.inf)
    best = masked.max()
    idx = int(np.argmax(masked >= best - _TIE_EPS))
    return float(proj[idx]), float(tpl.ux[idx]), float(tpl.uy[idx])


def ievc_step(state: KinematicState, m: MotionRestrictionMap,
              cfg: IevcConfig) -> IevcResult:
    """One restriction-control step: velocity in, restricted velocity out.

    Zero input velocity commands zero. An empty candidate ring is retried
    once at double radius; if still empty the result is zero velocity with
    the ``stranded`` flag set (the position is beyond lookahead reach of the
    permitted area).
    """
    vx, vy = state.velocity
    speed = math.hypot(vx, vy)
    if speed == 0.0:
        return IevcResult((0.0, 0.0))
    radius = max(cfg.min_radius, _round_half_away(cfg.lookahead_gain * speed))
    px, py = m.geometry.world_to_cell(*state.position)

    hit = _scan(m, cfg.ring(radius), px, py, vx, vy)
    if hit is None:
        radius *= 2
        hit = _scan(m, cfg.ring(radius), px, py, vx, vy)
        if hit is None:
            return IevcResult((0.0, 0.0), stranded=True, radius=radius)
    proj, ux, uy = hit
    mag = max(proj, 0.0)
    return IevcResult((mag * ux, mag * uy), radius=radius)
