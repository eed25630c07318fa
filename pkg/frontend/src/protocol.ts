/**
 * Message schema of the session service, shared by the WebSocket binding
 * (browser) and the raw length-prefixed binding (tests), plus PGM helpers.
 *
 * Every message is one JSON object with a `kind` field. Positions are mm,
 * velocities mm/s, forces N; grid row 0 is the smallest y.
 */

export type Mode = "powered" | "transparent" | "aan_hard" | "aan_soft" | "guided";

export interface StateMsg {
  kind: "state";
  seq: number;
  t: number;
  px: number;
  py: number;
  vx: number;
  vy: number;
  fx: number;
  fy: number;
  fox: number;
  foy: number;
  mode: Mode;
  rev: number;
}

export interface MapPayload {
  pgm_base64: string;
  resolution: number;
  origin: [number, number];
  width: number;
  height: number;
}

export interface AckMsg {
  kind: "ack";
  seq: number;
  ack_seq: number;
  server?: string;
  mode?: Mode;
  map?: MapPayload;
  t?: number;
}

export interface FaultMsg {
  kind: "fault";
  seq?: number;
  ack_seq?: number;
  code: string;
  message: string;
}

export type ServerMsg = StateMsg | AckMsg | FaultMsg;

export interface GridMap {
  width: number;
  height: number;
  resolution: number; // mm per cell
  origin: [number, number]; // world mm of cell (0,0) center
  cells: Uint8Array; // row-major, row 0 = smallest y; 0 = prohibited
}

export function isPermitted(map: GridMap, cx: number, cy: number): boolean {
  if (cx < 0 || cy < 0 || cx >= map.width || cy >= map.height) return false;
  return map.cells[cy * map.width + cx]! !== 0;
}

export function worldToCell(map: GridMap, x: number, y: number): [number, number] {
  return [
    Math.floor((x - map.origin[0]) / map.resolution + 0.5),
    Math.floor((y - map.origin[1]) / map.resolution + 0.5),
  ];
}

export function cellToWorld(map: GridMap, cx: number, cy: number): [number, number] {
  return [map.origin[0] + cx * map.resolution, map.origin[1] + cy * map.resolution];
}

/** Parse a binary PGM (P5, maxval <= 255) into a grid. */
export function parsePgm(
  bytes: Uint8Array,
  resolution = 1.0,
  origin?: [number, number],
): GridMap {
  let pos = 0;
  const token = (): string => {
    // skip whitespace and # comments
    for (;;) {
      while (pos < bytes.length && /\s/.test(String.fromCharCode(bytes[pos]!))) pos++;
      if (bytes[pos] === 0x23) {
        while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
      } else break;
    }
    const start = pos;
    while (pos < bytes.length && !/\s/.test(String.fromCharCode(bytes[pos]!))) pos++;
    return String.fromCharCode(...bytes.subarray(start, pos));
  };
  if (token() !== "P5") throw new Error("not a binary PGM");
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width >= 1 && height >= 1 && maxval >= 1 && maxval <= 255)) {
    throw new Error(`bad PGM header ${width}x${height} maxval ${maxval}`);
  }
  pos += 1; // single whitespace after maxval
  const cells = bytes.subarray(pos, pos + width * height);
  if (cells.length !== width * height) throw new Error("truncated PGM data");
  return {
    width,
    height,
    resolution,
    origin: origin ?? [-Math.floor(width / 2) * resolution, -Math.floor(height / 2) * resolution],
    cells: new Uint8Array(cells),
  };
}

/** Encode a grid as canonical binary PGM bytes. */
export function encodePgm(map: GridMap): Uint8Array {
  const header = `P5\n${map.width} ${map.height}\n255\n`;
  const head = new TextEncoder().encode(header);
  const out = new Uint8Array(head.length + map.cells.length);
  out.set(head, 0);
  out.set(map.cells, head.length);
  return out;
}

export function base64ToBytes(b64: string): Uint8Array {
  if (typeof atob === "function") {
    const bin = atob(b64);
    const out = new Uint8Array(bin.length);
    for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
    return out;
  }
  // node path (tests)
  return new Uint8Array(Buffer.from(b64, "base64"));
}

export function bytesToBase64(bytes: Uint8Array): string {
  if (typeof btoa === "function") {
    let bin = "";
    const chunk = 0x8000;
    for (let i = 0; i < bytes.length; i += chunk) {
      bin += String.fromCharCode(...bytes.subarray(i, i + chunk));
    }
    return btoa(bin);
  }
  return Buffer.from(bytes).toString("base64");
}

export function parseMapPayload(payload: MapPayload): GridMap {
  const grid = parsePgm(base64ToBytes(payload.pgm_base64), payload.resolution, [
    payload.origin[0],
    payload.origin[1],
  ]);
  if (grid.width !== payload.width || grid.height !== payload.height) {
    throw new Error("map payload dimensions disagree with PGM header");
  }
  return grid;
}
