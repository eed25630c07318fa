/**
 * Maze game: the restriction map is the maze (corridors permitted, walls
 * prohibited), driven in the hard-boundary assisted mode so walls block
 * crossing but allow sliding. Win when the end-effector reaches the target
 * cell.
 */

import type { GridMap } from "./protocol.js";
import { cellToWorld, isPermitted, worldToCell } from "./protocol.js";

export interface MazeState {
  map: GridMap;
  targetCell: [number, number];
  startWorld: [number, number];
  won: boolean;
}

export function mazeSession(map: GridMap, targetCell: [number, number],
                            startWorld: [number, number]): MazeState {
  if (!isPermitted(map, targetCell[0], targetCell[1])) {
    throw new Error("maze target must be a permitted cell");
  }
  return { map, targetCell, startWorld, won: false };
}

/** Feed each server state; returns true once the target cell is reached. */
export function mazeUpdate(maze: MazeState, px: number, py: number, tolCells = 1): boolean {
  const [cx, cy] = worldToCell(maze.map, px, py);
  if (Math.abs(cx - maze.targetCell[0]) <= tolCells &&
      Math.abs(cy - maze.targetCell[1]) <= tolCells) {
    maze.won = true;
  }
  return maze.won;
}

export interface DemoMaze {
  map: GridMap;
  start: [number, number];
  target: [number, number];
  corridor: number;
  laneRows: number[]; // center row of each horizontal lane, bottom-up
}

/**
 * Serpentine demo maze. The first lane runs through the grid's center row,
 * so a session idling at the world origin starts inside the entry corridor;
 * lanes stack upward from there, joined by alternating end connectors.
 * Walls between lanes are two corridor-widths thick.
 */
export function generateDemoMaze(
  width = 240,
  height = 180,
  corridor = 16,
  resolution = 1.0,
): DemoMaze {
  const cells = new Uint8Array(width * height);
  const centerRow = Math.floor(height / 2);
  const laneRows: number[] = [];
  for (let row = centerRow; row + Math.ceil(1.5 * corridor) < height; row += 3 * corridor) {
    laneRows.push(row);
  }
  for (const row of laneRows) {
    const y0 = row - Math.floor(corridor / 2);
    for (let r = 0; r < corridor; r++) {
      cells.fill(255, (y0 + r) * width + corridor, (y0 + r) * width + width - corridor);
    }
  }
  for (let i = 0; i + 1 < laneRows.length; i++) {
    const x0 = i % 2 === 0 ? width - 2 * corridor : corridor;
    const yLo = laneRows[i]! - Math.floor(corridor / 2);
    const yHi = laneRows[i + 1]! + Math.floor(corridor / 2);
    for (let y = yLo; y <= yHi; y++) {
      for (let c = 0; c < corridor; c++) cells[y * width + x0 + c] = 255;
    }
  }
  const map: GridMap = {
    width,
    height,
    resolution,
    origin: [-Math.floor(width / 2) * resolution, -Math.floor(height / 2) * resolution],
    cells,
  };
  const last = laneRows.length - 1;
  const targetX = last % 2 === 0 ? width - 2 * corridor + Math.floor(corridor / 2)
                                 : corridor + Math.floor(corridor / 2);
  return {
    map,
    start: cellToWorld(map, Math.floor(width / 2), centerRow),
    target: [targetX, laneRows[last]!],
    corridor,
    laneRows,
  };
}

/** Ordered corridor waypoints (world mm) from the start to the target. */
export function demoMazeWaypoints(maze: DemoMaze): [number, number][] {
  const { map, corridor, laneRows } = maze;
  const leftX = corridor + Math.floor(corridor / 2);
  const rightX = map.width - 2 * corridor + Math.floor(corridor / 2);
  const pts: [number, number][] = [maze.start];
  laneRows.forEach((row, i) => {
    const endX = i % 2 === 0 ? rightX : leftX;
    pts.push(cellToWorld(map, endX, row));
    if (i + 1 < laneRows.length) pts.push(cellToWorld(map, endX, laneRows[i + 1]!));
  });
  return pts;
}

/**
 * Carve a straight permitted corridor into the maze from an arbitrary world
 * position to the maze start, so a session standing anywhere can enter.
 */
export function carveEntry(map: GridMap, fromWorld: [number, number],
                           toWorld: [number, number], widthCells: number): void {
  const half = (widthCells / 2) * map.resolution;
  const [ax, ay] = fromWorld;
  const [bx, by] = toWorld;
  const dx = bx - ax;
  const dy = by - ay;
  const len2 = dx * dx + dy * dy;
  for (let cy = 0; cy < map.height; cy++) {
    for (let cx = 0; cx < map.width; cx++) {
      const [wx, wy] = cellToWorld(map, cx, cy);
      const t = len2 === 0 ? 0 : Math.max(0, Math.min(1, ((wx - ax) * dx + (wy - ay) * dy) / len2));
      const ddx = wx - (ax + t * dx);
      const ddy = wy - (ay + t * dy);
      if (ddx * ddx + ddy * ddy <= half * half) cells_set(map, cx, cy);
    }
  }
}

function cells_set(map: GridMap, cx: number, cy: number): void {
  map.cells[cy * map.width + cx] = 255;
}
