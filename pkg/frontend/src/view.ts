/**
 * Canvas renderer: map raster (prohibited dark, permitted light), optional
 * impedance-zone overlay, trail of recent positions, end-effector marker,
 * and force arrows (user force and assistance).
 */

import type { GridMap, StateMsg } from "./protocol.js";
import { fitTransform, screenToWorld, worldToScreen, type ViewTransform } from "./transform.js";

const PERMITTED_RGB: [number, number, number] = [232, 233, 240];
const PROHIBITED_RGB: [number, number, number] = [28, 30, 42];
const ZONE_RGB: [number, number, number] = [140, 170, 235];

export class MapView {
  private transform: ViewTransform | null = null;
  private raster: HTMLCanvasElement | null = null;
  private trail: [number, number][] = [];
  private map: GridMap | null = null;
  zoneRadiusCells = 0; // draw the soft zone when > 0
  targetCell: [number, number] | null = null;

  constructor(private canvas: HTMLCanvasElement) {}

  setMap(map: GridMap): void {
    this.map = map;
    this.transform = fitTransform(map, this.canvas.width, this.canvas.height);
    this.raster = renderRaster(map, this.zoneRadiusCells);
    this.trail = [];
  }

  setZoneRadius(cells: number): void {
    this.zoneRadiusCells = cells;
    if (this.map) this.raster = renderRaster(this.map, cells);
  }

  toWorld(sx: number, sy: number): [number, number] | null {
    return this.transform ? screenToWorld(this.transform, sx, sy) : null;
  }

  draw(state: StateMsg | null, cursorWorld: [number, number] | null): void {
    const ctx = this.canvas.getContext("2d")!;
    ctx.fillStyle = "#11131c";
    ctx.fillRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.map || !this.transform) return;
    const t = this.transform;

    // raster (prescaled once per map; drawImage scales to view)
    const [x0, y0] = worldToScreen(t, this.map.origin[0] - this.map.resolution / 2,
                                   this.map.origin[1] - this.map.resolution / 2);
    const wPx = this.map.width * this.map.resolution * t.scale;
    const hPx = this.map.height * this.map.resolution * t.scale;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(this.raster!, x0, y0 - hPx, wPx, hPx);

    if (this.targetCell) {
      const [tx, ty] = worldToScreen(
        t,
        this.map.origin[0] + this.targetCell[0] * this.map.resolution,
        this.map.origin[1] + this.targetCell[1] * this.map.resolution,
      );
      ctx.strokeStyle = "#27b34c";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(tx, ty, 8, 0, 2 * Math.PI);
      ctx.stroke();
    }

    if (state) {
      this.trail.push([state.px, state.py]);
      if (this.trail.length > 600) this.trail.shift();
      ctx.strokeStyle = "rgba(255, 120, 70, 0.7)";
      ctx.lineWidth = 1.2;
      ctx.beginPath();
      this.trail.forEach(([wx, wy], i) => {
        const [sx, sy] = worldToScreen(t, wx, wy);
        if (i === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      });
      ctx.stroke();

      const [mx, my] = worldToScreen(t, state.px, state.py);
      // user force and assistance arrows (assistance = composite - sensed)
      drawArrow(ctx, t, state, state.fx, state.fy, "#ffd23c");
      drawArrow(ctx, t, state, state.fox - state.fx, state.foy - state.fy, "#35d07f");
      ctx.fillStyle = "#ff5533";
      ctx.beginPath();
      ctx.arc(mx, my, 5, 0, 2 * Math.PI);
      ctx.fill();

      if (cursorWorld) {
        const [cx, cy] = worldToScreen(t, cursorWorld[0], cursorWorld[1]);
        ctx.strokeStyle = "rgba(255,210,60,0.6)";
        ctx.setLineDash([4, 4]);
        ctx.beginPath();
        ctx.moveTo(mx, my);
        ctx.lineTo(cx, cy);
        ctx.stroke();
        ctx.setLineDash([]);
      }
    }
  }
}

function drawArrow(ctx: CanvasRenderingContext2D, t: ViewTransform,
                   state: StateMsg, fx: number, fy: number, color: string): void {
  const mag = Math.hypot(fx, fy);
  if (mag < 0.2) return;
  const [sx, sy] = worldToScreen(t, state.px, state.py);
  const [ex, ey] = worldToScreen(t, state.px + fx * 3.0, state.py + fy * 3.0);
  ctx.strokeStyle = color;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(ex, ey);
  ctx.stroke();
}

/**
 * Offscreen 1 px/cell raster. The soft-mode zone overlay shades prohibited
 * cells within the kernel radius of the permitted area using a two-pass
 * chamfer distance transform; it is a visual aid, accurate to the chamfer
 * metric (~4% radial error), not the controller's exact field.
 */
function renderRaster(map: GridMap, zoneRadiusCells: number): HTMLCanvasElement {
  const off = document.createElement("canvas");
  off.width = map.width;
  off.height = map.height;
  const ctx = off.getContext("2d")!;
  const img = ctx.createImageData(map.width, map.height);
  const zone = zoneRadiusCells > 0 ? chamferDistance(map) : null;
  const zoneLimit = 2 * zoneRadiusCells;
  for (let cy = 0; cy < map.height; cy++) {
    for (let cx = 0; cx < map.width; cx++) {
      const idx = cy * map.width + cx;
      // canvas row 0 is the top; grid row 0 is the smallest y
      const out = ((map.height - 1 - cy) * map.width + cx) * 4;
      let rgb = map.cells[idx]! !== 0 ? PERMITTED_RGB : PROHIBITED_RGB;
      if (zone && map.cells[idx]! === 0 && zone[idx]! <= zoneLimit) {
        const a = 1 - zone[idx]! / (zoneLimit + 1);
        rgb = [
          PROHIBITED_RGB[0] + (ZONE_RGB[0] - PROHIBITED_RGB[0]) * a,
          PROHIBITED_RGB[1] + (ZONE_RGB[1] - PROHIBITED_RGB[1]) * a,
          PROHIBITED_RGB[2] + (ZONE_RGB[2] - PROHIBITED_RGB[2]) * a,
        ];
      }
      img.data[out] = rgb[0];
      img.data[out + 1] = rgb[1];
      img.data[out + 2] = rgb[2];
      img.data[out + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
  return off;
}

/** 3-4 chamfer distance (in cells, scaled by 3) from the permitted area. */
function chamferDistance(map: GridMap): Float32Array {
  const { width: w, height: h, cells } = map;
  const INF = 1e9;
  const d = new Float32Array(w * h);
  for (let i = 0; i < w * h; i++) d[i] = cells[i]! !== 0 ? 0 : INF;
  const at = (x: number, y: number) =>
    x < 0 || y < 0 || x >= w || y >= h ? INF : d[y * w + x]!;
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const i = y * w + x;
      d[i] = Math.min(d[i]!, at(x - 1, y) + 1, at(x, y - 1) + 1,
                      at(x - 1, y - 1) + 1.334, at(x + 1, y - 1) + 1.334);
    }
  }
  for (let y = h - 1; y >= 0; y--) {
    for (let x = w - 1; x >= 0; x--) {
      const i = y * w + x;
      d[i] = Math.min(d[i]!, at(x + 1, y) + 1, at(x, y + 1) + 1,
                      at(x + 1, y + 1) + 1.334, at(x - 1, y + 1) + 1.334);
    }
  }
  return d;
}
