/**
 * Mouse-driven force input: a virtual spring from the end-effector marker to
 * the cursor, which keeps input bounded and feels like a compliant grip.
 */

export interface ForceInputConfig {
  gain: number; // N per mm of cursor-marker separation
  cap: number; // N
}

export const DEFAULT_FORCE_INPUT: ForceInputConfig = { gain: 0.6, cap: 30.0 };

/** Spring force (N) from marker toward cursor, both in world mm. */
export function mouseToForce(
  cursorMm: [number, number],
  markerMm: [number, number],
  cfg: ForceInputConfig = DEFAULT_FORCE_INPUT,
): [number, number] {
  let fx = cfg.gain * (cursorMm[0] - markerMm[0]);
  let fy = cfg.gain * (cursorMm[1] - markerMm[1]);
  const mag = Math.hypot(fx, fy);
  if (mag > cfg.cap) {
    fx *= cfg.cap / mag;
    fy *= cfg.cap / mag;
  }
  return [fx, fy];
}

/** Collects brush stroke points (world mm), decimated by a minimum spacing. */
export class BrushStroke {
  points: [number, number][] = [];
  constructor(private minSpacingMm = 2.0) {}

  add(x: number, y: number): void {
    const last = this.points[this.points.length - 1];
    if (last && Math.hypot(x - last[0], y - last[1]) < this.minSpacingMm) return;
    this.points.push([x, y]);
  }

  takeMessage(widthCells: number, value: number): object | null {
    if (this.points.length === 0) return null;
    const pts = this.points.length === 1 ? [this.points[0]!, this.points[0]!] : this.points;
    const msg = { kind: "edit_map", stroke: pts, width: widthCells, value };
    this.points = [];
    return msg;
  }
}
