"""Off-loop trace analysis: boundary error metrics and fits.

Error convention: a sample strictly inside the permitted area contributes
zero; a sample whose cell is prohibited contributes the distance to the
nearest permitted cell center, in millimeters.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from .restriction import MotionRestrictionMap


def distance_outside(m: MotionRestrictionMap, positions: np.ndarray) -> np.ndarray:
    """Per-sample distance (mm) to the permitted area; 0 for inside samples."""
    positions = np.asarray(positions, dtype=float)
    geom = m.geometry
    inv = 1.0 / geom.resolution
    cx = np.floor((positions[:, 0] - geom.origin[0]) * inv + 0.5).astype(np.int64)
    cy = np.floor((positions[:, 1] - geom.origin[1]) * inv + 0.5).astype(np.int64)
    inb = (cx >= 0) & (cx < geom.width_cells) & (cy >= 0) & (cy < geom.height_cells)
    inside = np.zeros(len(positions), dtype=bool)
    inside[inb] = m.cells[cy[inb], cx[inb]] != 0

    out = np.zeros(len(positions))
    if inside.all():
        return out
    hits = np.argwhere(m.cells != 0)
    if len(hits) == 0:
        out[:] = np.inf
        return out
    centers = np.column_stack([geom.origin[0] + hits[:, 1] * geom.resolution,
                               geom.origin[1] + hits[:, 0] * geom.resolution])
    tree = cKDTree(centers)
    out[~inside], _ = tree.query(positions[~inside])
    return out


def mean_absolute_error(m: MotionRestrictionMap, positions: np.ndarray) -> float:
    return float(distance_outside(m, positions).mean())


def lap_slices(positions: np.ndarray, center: tuple[float, float]) -> list[slice]:
    """Split samples of a roughly circular run into laps by unwrapped angle."""
    rel = np.asarray(positions, dtype=float) - np.asarray(center, dtype=float)
    angles = np.unwrap(np.arctan2(rel[:, 1], rel[:, 0]))
    total = angles - angles[0]
    lap_ids = np.floor(np.abs(total) / (2.0 * math.pi)).astype(int)
    slices = []
    for lap in range(lap_ids.max() + 1):
        idx = np.nonzero(lap_ids == lap)[0]
        if len(idx):
            slices.append(slice(int(idx[0]), int(idx[-1]) + 1))
    return slices


def linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line fit; returns (slope, intercept, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2
