/**
 * Affine, invertible world(mm) <-> screen(px) mapping for the map canvas.
 * Screen y grows downward; world y grows upward, so the y axis flips.
 */

import type { GridMap } from "./protocol.js";

export interface ViewTransform {
  scale: number; // px per mm
  offsetX: number; // px of world x=0
  offsetY: number; // px of world y=0 (before flip)
  heightPx: number;
}

export function fitTransform(map: GridMap, widthPx: number, heightPx: number, pad = 10): ViewTransform {
  const worldW = map.width * map.resolution;
  const worldH = map.height * map.resolution;
  const scale = Math.min((widthPx - 2 * pad) / worldW, (heightPx - 2 * pad) / worldH);
  const left = map.origin[0] - map.resolution / 2;
  const bottom = map.origin[1] - map.resolution / 2;
  return {
    scale,
    offsetX: pad - left * scale + (widthPx - 2 * pad - worldW * scale) / 2,
    offsetY: pad - bottom * scale + (heightPx - 2 * pad - worldH * scale) / 2,
    heightPx,
  };
}

export function worldToScreen(t: ViewTransform, x: number, y: number): [number, number] {
  return [x * t.scale + t.offsetX, t.heightPx - (y * t.scale + t.offsetY)];
}

export function screenToWorld(t: ViewTransform, sx: number, sy: number): [number, number] {
  return [(sx - t.offsetX) / t.scale, (t.heightPx - sy - t.offsetY) / t.scale];
}
