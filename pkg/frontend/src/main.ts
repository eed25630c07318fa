/**
 * Operator console wiring: connect, render at display rate, steer with the
 * mouse spring, switch modes, paint map edits, play the maze.
 */

import { SessionClient } from "./client.js";
import { BrushStroke, DEFAULT_FORCE_INPUT, mouseToForce } from "./input.js";
import { carveEntry, generateDemoMaze, mazeSession, mazeUpdate, type MazeState } from "./maze.js";
import { bytesToBase64, encodePgm, type Mode } from "./protocol.js";
import { MapView } from "./view.js";

const canvas = document.getElementById("map") as HTMLCanvasElement;
const modeSelect = document.getElementById("mode") as HTMLSelectElement;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const latencyEl = document.getElementById("latency") as HTMLSpanElement;
const faultEl = document.getElementById("fault") as HTMLSpanElement;
const brushSelect = document.getElementById("brush") as HTMLSelectElement;
const mazeButton = document.getElementById("maze") as HTMLButtonElement;
const winBanner = document.getElementById("win") as HTMLDivElement;

const view = new MapView(canvas);
let maze: MazeState | null = null;
let cursorWorld: [number, number] | null = null;
let steering = false;
const brush = new BrushStroke();

const wsUrl = new URLSearchParams(location.search).get("ws")
  ?? `ws://${location.hostname || "127.0.0.1"}:7345`;

const client = new SessionClient(wsUrl, {
  onMap: (m) => {
    view.setMap(m);
    faultEl.textContent = "";
  },
  onMode: (mode) => {
    modeSelect.value = mode;
    view.setZoneRadius(mode === "aan_soft" ? 6 : 0);
  },
  onFault: (code, message) => {
    faultEl.textContent = `${code}: ${message}`;
  },
  onConnection: (up) => {
    statusEl.textContent = up ? "connected" : "disconnected";
    statusEl.className = up ? "ok" : "bad";
  },
});
client.connect();

modeSelect.addEventListener("change", () => {
  client.setMode(modeSelect.value as Mode);
  view.targetCell = null;
  maze = null;
  winBanner.hidden = true;
});

mazeButton.addEventListener("click", () => {
  const demo = generateDemoMaze();
  // the end-effector may be anywhere; carve an entry corridor to the start
  const here = client.latest;
  if (here) carveEntry(demo.map, [here.px, here.py], demo.start, demo.corridor);
  maze = mazeSession(demo.map, demo.target, demo.start);
  client.loadMapPgm(bytesToBase64(encodePgm(demo.map)));
  client.setMode("aan_hard");
  view.setMap(demo.map);
  view.targetCell = demo.target;
  winBanner.hidden = true;
});

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  cursorWorld = view.toWorld(ev.clientX - rect.left, ev.clientY - rect.top);
  if (steering && brushSelect.value !== "off" && cursorWorld) {
    brush.add(cursorWorld[0], cursorWorld[1]);
  }
});
canvas.addEventListener("pointerdown", () => {
  steering = true;
});
const release = () => {
  steering = false;
  if (brushSelect.value !== "off") {
    const msg = brush.takeMessage(3.0, brushSelect.value === "permit" ? 255 : 0);
    if (msg) client.send(msg as Record<string, unknown>);
  }
};
canvas.addEventListener("pointerup", release);
canvas.addEventListener("pointerleave", () => {
  cursorWorld = null;
  release();
});

function frame(): void {
  const state = client.latest;
  // mouse spring drives the session only while the pointer is held down
  // and the brush is off; the marker itself only ever moves from states
  if (steering && brushSelect.value === "off" && cursorWorld && state) {
    const [fx, fy] = mouseToForce(cursorWorld, [state.px, state.py], DEFAULT_FORCE_INPUT);
    client.sendForce(fx, fy);
  }
  if (maze && state && mazeUpdate(maze, state.px, state.py)) {
    winBanner.hidden = false;
  }
  view.draw(state, steering && brushSelect.value === "off" ? cursorWorld : null);
  latencyEl.textContent = Number.isNaN(client.latencyMs)
    ? "latency: -"
    : `latency: ${client.latencyMs.toFixed(0)} ms`;
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
