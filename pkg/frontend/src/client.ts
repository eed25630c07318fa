/**
 * WebSocket session client. Network receipt and rendering are decoupled by
 * a one-slot latest-state buffer: the render loop reads the freshest state,
 * old frames are simply overwritten. The server stays the authority; the
 * marker position only ever comes from state messages.
 */

import type { AckMsg, GridMap, Mode, ServerMsg, StateMsg } from "./protocol.js";
import { parseMapPayload } from "./protocol.js";

export interface SessionEvents {
  onMap?: (map: GridMap) => void;
  onMode?: (mode: Mode) => void;
  onFault?: (code: string, message: string) => void;
  onConnection?: (up: boolean) => void;
}

interface PendingEcho {
  fx: number;
  fy: number;
  sentAt: number;
}

export class SessionClient {
  private ws: WebSocket | null = null;
  private seq = 0;
  latest: StateMsg | null = null; // one-slot buffer
  map: GridMap | null = null;
  mode: Mode = "transparent";
  /** input-to-reflected-state round trip, ms; NaN until measured */
  latencyMs = Number.NaN;
  private echo: PendingEcho | null = null;
  private helloSentAt = 0;

  constructor(private url: string, private events: SessionEvents = {}) {}

  connect(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.events.onConnection?.(true);
      this.helloSentAt = performance.now();
      this.send({ kind: "hello", client: "operator-console" });
    };
    ws.onclose = () => {
      this.events.onConnection?.(false);
      this.ws = null;
      setTimeout(() => this.connect(), 1000);
    };
    ws.onmessage = (ev) => {
      let msg: ServerMsg;
      try {
        msg = JSON.parse(String(ev.data)) as ServerMsg;
      } catch {
        return;
      }
      this.handle(msg);
    };
  }

  private handle(msg: ServerMsg): void {
    if (msg.kind === "state") {
      this.latest = msg;
      if (msg.mode !== this.mode) {
        this.mode = msg.mode;
        this.events.onMode?.(msg.mode);
      }
      // latency = send of a force value until the first state reflecting it
      if (
        this.echo &&
        Math.abs(msg.fx - this.echo.fx) < 1e-9 &&
        Math.abs(msg.fy - this.echo.fy) < 1e-9
      ) {
        this.latencyMs = performance.now() - this.echo.sentAt;
        this.echo = null;
      }
      return;
    }
    if (msg.kind === "ack") {
      if (msg.map) {
        this.map = parseMapPayload(msg.map);
        this.events.onMap?.(this.map);
      }
      if (msg.mode) {
        this.mode = msg.mode;
        this.events.onMode?.(msg.mode);
      }
      if (Number.isNaN(this.latencyMs) && this.helloSentAt > 0) {
        this.latencyMs = performance.now() - this.helloSentAt;
        this.helloSentAt = 0;
      }
      return;
    }
    this.events.onFault?.(msg.code, msg.message);
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(msg: Record<string, unknown>): void {
    if (!this.connected) return;
    this.seq += 1;
    this.ws!.send(JSON.stringify({ ...msg, seq: this.seq }));
  }

  sendForce(fx: number, fy: number): void {
    // powered mode records zero force, so force echo cannot measure there
    if (this.mode !== "powered" && this.echo === null) {
      this.echo = { fx, fy, sentAt: performance.now() };
    }
    this.send({ kind: "force_input", fx, fy });
  }

  setMode(mode: Mode, extra: Record<string, unknown> = {}): void {
    this.send({ kind: "set_mode", mode, ...extra });
  }

  loadMapPgm(pgmBase64: string): void {
    this.send({ kind: "load_map", pgm_base64: pgmBase64 });
  }
}
