"""Spring force maps and the impedance force composition.

The assistance field is precomputed from the restriction map in two passes:
the permitted area is first dilated by a disk kernel (making room for a
force zone centered on the original boundary), then convolved with the same
kernel. ``1 - conv`` scaled by the zone width gives a penetration depth per
cell; its negative gradient gives the assistance direction. Per-step cost of
the controller is a constant handful of array lookups regardless of map
complexity; rebuild cost after an edit is one convolution, paid off-loop.

Convolution counts are computed against the binary disk footprint and
rounded back to exact integers, so FFT and direct evaluation agree bit-for-
bit and plateaus are exactly flat.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .geometry import GridGeometry
from .restriction import PERMITTED, MotionRestrictionMap

_MAGIC = b"GGSF"
# Above this work estimate (cells x kernel taps) FFT convolution wins.
_FFT_WORK_THRESHOLD = 2e7


class StaleMapError(RuntimeError):
    """Spring map and restriction map revisions no longer match."""


@dataclass(frozen=True)
class ConvolutionKernel:
    """Uniformly filled disk kernel of radius ``radius`` cells."""

    radius: int

    def __post_init__(self) -> None:
        if self.radius < 1:
            raise ValueError("kernel radius must be >= 1")

    @property
    def footprint(self) -> np.ndarray:
        """(2r+1)^2 boolean disk: dx^2 + dy^2 <= r^2."""
        span = np.arange(-self.radius, self.radius + 1)
        dx, dy = np.meshgrid(span, span)
        return dx * dx + dy * dy <= self.radius * self.radius

    @property
    def weights(self) -> np.ndarray:
        """Disk normalized to sum 1."""
        fp = self.footprint.astype(float)
        return fp / fp.sum()

    @property
    def tap_count(self) -> int:
        return int(np.count_nonzero(self.footprint))


@dataclass
class ImpedanceParams:
    spring_stiffness: float        # N/mm of penetration depth
    zone_width: float              # mm; must equal 2 * kernel_radius * resolution
    kernel_radius: int             # cells
    damper_coeff: float = 0.0      # N*s/mm along the assistance direction

    def __post_init__(self) -> None:
        if self.spring_stiffness < 0:
            raise ValueError("spring_stiffness must be >= 0")
        if self.kernel_radius < 1:
            raise ValueError("kernel_radius must be >= 1")

    @classmethod
    def for_geometry(cls, geom: GridGeometry, spring_stiffness: float,
                     kernel_radius: int, damper_coeff: float = 0.0) -> "ImpedanceParams":
        return cls(spring_stiffness, 2.0 * kernel_radius * geom.resolution,
                   kernel_radius, damper_coeff)

    def validate_zone(self, resolution: float) -> None:
        expected = 2.0 * self.kernel_radius * resolution
        if not math.isclose(self.zone_width, expected, rel_tol=1e-9):
            raise ValueError(
                f"zone_width {self.zone_width} mm inconsistent with "
                f"kernel radius {self.kernel_radius} at {resolution} mm/cell "
                f"(expected {expected})")


@dataclass
class ExpandedMap(MotionRestrictionMap):
    """Dilated restriction map, tagged with its source so staleness shows."""

    kernel_radius: int = 0
    source_revision: int = 0


def expand_map(m: MotionRestrictionMap, kernel: ConvolutionKernel) -> ExpandedMap:
    """Dilate the permitted area by the kernel disk.

    A cell is permitted in the output iff any permitted input cell lies
    within the disk around it (out-of-grid treated as prohibited). Large
    kernels go through the exact-count convolution instead of plain
    morphology, which is dramatically faster and provably identical.
    """
    if kernel.radius >= min(m.geometry.width_cells, m.geometry.height_cells) / 2:
        raise ValueError("kernel radius too large for this grid")
    mask = m.cells != 0
    if mask.size * kernel.footprint.size > _FFT_WORK_THRESHOLD:
        dilated = _disk_counts(mask.astype(np.uint8), kernel) >= 1
    else:
        dilated = ndimage.binary_dilation(mask, structure=kernel.footprint)
    return ExpandedMap(m.geometry, np.where(dilated, PERMITTED, 0).astype(np.uint8),
                       revision=m.revision, kernel_radius=kernel.radius,
                       source_revision=m.revision)


def _disk_counts(mask01: np.ndarray, kernel: ConvolutionKernel) -> np.ndarray:
    """Exact count of permitted cells under the disk at every cell."""
    fp = kernel.footprint.astype(float)
    work = mask01.size * fp.size
    method = "fft" if work > _FFT_WORK_THRESHOLD else "direct"
    conv = signal.convolve(mask01.astype(float), fp, mode="same", method=method)
    counts = np.rint(conv)
    if np.abs(conv - counts).max() > 1e-3:
        # FFT drifted beyond safe rounding; redo exactly.
        conv = signal.convolve(mask01.astype(float), fp, mode="same", method="direct")
        counts = np.rint(conv)
    return counts


@dataclass
class SpringForceMap:
    """Penetration depth field d(x) in mm, 0 inside the expanded permitted
    area, ``zone_width`` deep inside prohibited territory."""

    geometry: GridGeometry
    depth: np.ndarray           # float64 (H, W), mm
    zone_width: float           # mm
    source_revision: int = 0

    def depth_at(self, cx: int, cy: int) -> float:
        cx = min(max(cx, 0), self.geometry.width_cells - 1)
        cy = min(max(cy, 0), self.geometry.height_cells - 1)
        return float(self.depth[cy, cx])


def build_spring_map(expanded: ExpandedMap, kernel: ConvolutionKernel,
                     p: ImpedanceParams) -> SpringForceMap:
    """Depth field ``zone_width * (1 - conv01)`` over the expanded map.

    The transition ramp spans the kernel diameter and is centered on the
    original (pre-expansion) permitted boundary.
    """
    if not isinstance(expanded, ExpandedMap):
        raise StaleMapError("build_spring_map needs the output of expand_map")
    if expanded.kernel_radius != kernel.radius or kernel.radius != p.kernel_radius:
        raise StaleMapError(
            f"kernel radius mismatch: expanded with {expanded.kernel_radius}, "
            f"convolving with {kernel.radius}, params say {p.kernel_radius}")
    p.validate_zone(expanded.geometry.resolution)
    counts = _disk_counts((expanded.cells != 0).astype(np.uint8), kernel)
    depth = p.zone_width * (1.0 - counts / kernel.tap_count)
    np.clip(depth, 0.0, p.zone_width, out=depth)
    return SpringForceMap(expanded.geometry, depth, p.zone_width,
                          source_revision=expanded.source_revision)


def impedance_step(force: tuple[float, float], last_velocity: tuple[float, float],
                   cell: tuple[int, int], spr: SpringForceMap,
                   p: ImpedanceParams) -> tuple[float, float]:
    """Compose measured force with spring and damper terms at ``cell``.

    The assistance direction is the negative central-difference gradient of
    the depth field (normalized); on flat plateaus there is no direction and
    the input force passes through unchanged. Velocities are mm/s, output N.
    """
    d = spr.depth
    h, w = d.shape
    x = min(max(cell[0], 1), w - 2)
    y = min(max(cell[1], 1), h - 2)
    gx = d[y, x + 1] - d[y, x - 1]
    gy = d[y + 1, x] - d[y - 1, x]
    norm = math.hypot(gx, gy)
    fx, fy = force
    if norm == 0.0:
        return (fx, fy)
    ux = -gx / norm
    uy = -gy / norm
    spring = p.spring_stiffness * d[y, x]
    damper = p.damper_coeff * (last_velocity[0] * ux + last_velocity[1] * uy)
    mag = spring + damper
    return (fx + mag * ux, fy + mag * uy)


def depth_profile_1d(permitted_lo: float, permitted_hi: float,
                     kernel_width: float, x: np.ndarray | float,
                     zone_width: float = 1.0) -> np.ndarray | float:
    """Continuous 1-D analog of the depth construction, solved in closed form.

    Convolving the indicator of [lo, hi] with a unit-area box of width ``w``
    is the overlap length of [x - w/2, x + w/2] with the segment over ``w``;
    the result ramps linearly across each boundary. Used to validate the 2-D
    discrete pipeline against exact geometry.
    """
    xa = np.asarray(x, dtype=float)
    half = 0.5 * kernel_width
    overlap = np.minimum(permitted_hi, xa + half) - np.maximum(permitted_lo, xa - half)
    conv = np.clip(overlap, 0.0, None) / kernel_width
    out = zone_width * (1.0 - conv)
    return out if isinstance(x, np.ndarray) else float(out)


# --- spring map file format --------------------------------------------------
# 16-byte header: magic "GGSF", uint32 width, uint32 height, uint32 zone width
# in micrometres; then row-major little-endian float32 depths, row 0 = min y.

def store_spring_map(spr: SpringForceMap, path) -> None:
    header = struct.pack("<4sIII", _MAGIC, spr.geometry.width_cells,
                         spr.geometry.height_cells, round(spr.zone_width * 1000))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(spr.depth.astype("<f4").tobytes())


def load_spring_map(path, resolution: float = 1.0,
                    origin: tuple[float, float] | None = None) -> SpringForceMap:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise ValueError("truncated spring map header")
        magic, width, height, lmax_um = struct.unpack("<4sIII", header)
        if magic != _MAGIC:
            raise ValueError(f"bad spring map magic {magic!r}")
        data = fh.read(4 * width * height)
    if len(data) != 4 * width * height:
        raise ValueError("truncated spring map data")
    depth = np.frombuffer(data, dtype="<f4").reshape(height, width).astype(float)
    if origin is None:
        origin = (-(width // 2) * resolution, -(height // 2) * resolution)
    geom = GridGeometry(width, height, resolution, origin)
    return SpringForceMap(geom, depth, lmax_um / 1000.0)
