"""Live session service: the control loop exposed to remote operators.

One process runs two cooperating contexts:

* the control thread steps the active session at T_s wall-clock pacing and
  never touches the network; commands arrive through a queue drained at step
  boundaries, outbound state frames go into a bounded deque (oldest dropped
  on back-pressure, the loop never blocks);
* the asyncio side accepts connections and shuttles frames. Two bindings
  share one port: the raw framing (4-byte little-endian length + UTF-8 JSON)
  and RFC 6455 WebSocket text frames carrying the same JSON objects, for
  browser clients. The first bytes of a connection select the binding ("GET "
  means an HTTP upgrade).

The first connection is the operator; later ones are read-only viewers.
Force input is zero-order-held by the loop and decays to zero when stale
(safety watchdog). A disconnect pauses stepping with zero commanded
velocity.
"""

from __future__ import annotations

import asyncio
import base64
import collections
import hashlib
import json
import math
import struct
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .admittance import AdmittanceParams
from .geometry import GridGeometry
from .ievc import IevcConfig
from .impedance import ImpedanceParams
from .plant import PlantParams, PlantState
from .restriction import (CellRect, MotionRestrictionMap, Stroke, from_pgm_bytes,
                          load_pgm, to_pgm_bytes)
from .session import Mode, Session

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

CLIENT_KINDS = {"hello", "set_mode", "set_params", "load_map", "edit_map", "force_input"}


@dataclass
class ServiceConfig:
    mode: str = "transparent"
    map_path: str | None = None
    resolution: float = 1.0
    decimation: int = 10            # state frame every N steps
    force_stale_s: float = 0.2      # watchdog: zero the held force after this
    force_cap: float = 100.0        # N, per magnitude
    seed: int = 0
    noise: float = 0.0
    powered_speed: float = 50.0
    lookahead_s: float = 0.075
    admittance: dict = field(default_factory=dict)
    impedance: dict = field(default_factory=dict)
    plant: dict = field(default_factory=dict)


def _default_map(resolution: float = 1.0) -> MotionRestrictionMap:
    from .restriction import RegionInequalitySpec, map_from_inequalities
    from .geometry import default_geometry
    return map_from_inequalities(
        RegionInequalitySpec([lambda x, y: x ** 2 + y ** 2 - 200.0 ** 2]),
        default_geometry())


class SessionService:
    """Owns the session, the control thread, and connected clients."""

    def __init__(self, cfg: ServiceConfig | None = None):
        self.cfg = cfg or ServiceConfig()
        if self.cfg.map_path:
            self.map = load_pgm(self.cfg.map_path, self.cfg.resolution)
        else:
            self.map = _default_map()
        self.session = self._build_session(self.cfg.mode)
        self.states: collections.deque = collections.deque(maxlen=256)
        self.commands: collections.deque = collections.deque()
        self.faults_out: collections.deque = collections.deque(maxlen=64)
        self._force = (0.0, 0.0)
        self._force_at = -math.inf
        self._paused = threading.Event()
        self._paused.set()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._out_seq = 0
        self._seq_lock = threading.Lock()
        self._loop_steps = 0
        self.server: asyncio.AbstractServer | None = None
        self._operator: asyncio.StreamWriter | None = None

    def _next_seq(self) -> int:
        with self._seq_lock:
            self._out_seq += 1
            return self._out_seq

    # -- session construction ----------------------------------------------------

    def _build_session(self, mode: str, keep_state: Session | None = None,
                       overrides: dict | None = None) -> Session:
        o = overrides or {}
        plant = PlantParams(**{**self.cfg.plant, **o.get("plant", {})})
        adm_kw = {**self.cfg.admittance, **o.get("admittance", {})}
        adm_kw.setdefault("timestep", plant.timestep)
        adm_kw["timestep"] = plant.timestep
        adm = AdmittanceParams(**adm_kw)
        ievc = IevcConfig.from_lookahead(
            o.get("ievc", {}).get("lookahead_s", self.cfg.lookahead_s),
            self.map.geometry.resolution,
            o.get("ievc", {}).get("min_radius", 3))
        imp = None
        imp_kw = {**self.cfg.impedance, **o.get("impedance", {})}
        if Mode(mode) in (Mode.AAN_SOFT, Mode.GUIDED) or imp_kw:
            imp_kw.setdefault("spring_stiffness", 0.2)
            imp_kw.setdefault("kernel_radius", 6)
            imp = ImpedanceParams.for_geometry(self.map.geometry,
                                               imp_kw["spring_stiffness"],
                                               int(imp_kw["kernel_radius"]))
        kw = dict(admittance=adm, impedance=imp, ievc=ievc, plant=plant,
                  noise=self.cfg.noise, seed=self.cfg.seed,
                  powered_speed=o.get("powered_speed", self.cfg.powered_speed))
        if Mode(mode) is Mode.GUIDED:
            kw["guided_path"] = o.get("guided_path") or [(0.0, 0.0), (100.0, 0.0)]
            kw["leading_speed"] = o.get("leading_speed", 30.0)
        s = Session(mode, self.map, **kw)
        if keep_state is not None:
            s.plant = PlantState(position=keep_state.plant.position,
                                 velocity=keep_state.plant.velocity)
            s.step_index = keep_state.step_index
        return s

    # -- control loop ---------------------------------------------------------------

    def _held_force(self, t, pos, vel):
        if time.monotonic() - self._force_at > self.cfg.force_stale_s:
            return (0.0, 0.0)
        return self._force

    def _loop(self) -> None:
        ts = self.session.timestep
        rec = np.empty(12)
        deadline = time.monotonic()
        while not self._stop.is_set():
            if self._paused.is_set():
                time.sleep(0.005)
                deadline = time.monotonic()
                continue
            while self.commands:
                fn = self.commands.popleft()
                try:
                    fn()
                except Exception as exc:  # surface, never kill the loop
                    self._fault("command_failed", str(exc))
            try:
                self.session.step(self._held_force, record=rec)
            except Exception as exc:
                self._fault("step_failed", str(exc))
                self._paused.set()
                continue
            for f in self.session.faults:
                self._fault(f.code, f.message)
            self.session.faults.clear()
            self._loop_steps += 1
            if self._loop_steps % self.cfg.decimation == 0:
                self.states.append({
                    "kind": "state", "seq": self._next_seq(),
                    "t": rec[0], "px": rec[1], "py": rec[2],
                    "vx": rec[3], "vy": rec[4],
                    "fx": rec[7], "fy": rec[8], "fox": rec[9], "foy": rec[10],
                    "mode": self.session.mode.value, "rev": int(rec[11]),
                })
            deadline += ts
            lag = deadline - time.monotonic()
            if lag > 0:
                time.sleep(lag)
            elif lag < -0.1:  # fell far behind; resync rather than burst
                deadline = time.monotonic()

    def _fault(self, code: str, message: str) -> None:
        self.faults_out.append({"kind": "fault", "seq": self._next_seq(),
                                "code": code, "message": message})

    # -- inbound commands --------------------------------------------------------------

    def handle_message(self, msg: dict, operator: bool) -> dict | None:
        """Apply one client message; returns an ack/fault to send, or None."""
        kind = msg.get("kind")
        seq = msg.get("seq", -1)
        if kind not in CLIENT_KINDS:
            return {"kind": "fault", "code": "bad_kind",
                    "message": f"unknown kind {kind!r}", "ack_seq": seq}
        if kind == "hello":
            return {"kind": "ack", "ack_seq": seq, "server": "gridguide",
                    "mode": self.session.mode.value,
                    "map": self.map_payload(), "t": time.monotonic()}
        if kind == "force_input":
            if not operator:
                return None
            try:
                fx = float(msg["fx"])
                fy = float(msg["fy"])
            except (KeyError, TypeError, ValueError):
                return {"kind": "fault", "code": "bad_force",
                        "message": "force_input needs numeric fx, fy", "ack_seq": seq}
            if not (math.isfinite(fx) and math.isfinite(fy)):
                return {"kind": "fault", "code": "bad_force",
                        "message": "non-finite force rejected", "ack_seq": seq}
            mag = math.hypot(fx, fy)
            clamped = mag > self.cfg.force_cap
            if clamped:
                fx *= self.cfg.force_cap / mag
                fy *= self.cfg.force_cap / mag
            self._force = (fx, fy)
            self._force_at = time.monotonic()
            if clamped:
                return {"kind": "fault", "code": "force_clamped",
                        "message": f"force clamped to {self.cfg.force_cap} N",
                        "ack_seq": seq}
            return None
        if not operator:
            return {"kind": "fault", "code": "read_only",
                    "message": "viewer connections cannot issue commands",
                    "ack_seq": seq}
        if kind == "set_mode":
            mode = msg.get("mode", "")
            try:
                Mode(mode)
            except ValueError:
                return {"kind": "fault", "code": "bad_mode",
                        "message": f"unknown mode {mode!r}", "ack_seq": seq}
            overrides = {k: v for k, v in msg.items()
                         if k in ("powered_speed", "guided_path", "leading_speed",
                                  "admittance", "impedance", "ievc")}

            def apply():
                self.session = self._build_session(mode, keep_state=self.session,
                                                   overrides=overrides)
            self.commands.append(apply)
            return {"kind": "ack", "ack_seq": seq}
        if kind == "set_params":
            overrides = {k: v for k, v in msg.items()
                         if k in ("admittance", "impedance", "ievc", "plant",
                                  "powered_speed")}

            def apply():
                self.session = self._build_session(self.session.mode.value,
                                                   keep_state=self.session,
                                                   overrides=overrides)
            self.commands.append(apply)
            return {"kind": "ack", "ack_seq": seq}
        if kind == "load_map":
            try:
                blob = base64.b64decode(msg["pgm_base64"])
                new_map = from_pgm_bytes(blob, self.cfg.resolution)
            except (KeyError, ValueError) as exc:
                return {"kind": "fault", "code": "bad_map",
                        "message": f"load_map: {exc}", "ack_seq": seq}

            def apply():
                self.map = new_map
                self.session = self._build_session(self.session.mode.value,
                                                   keep_state=self.session)
            self.commands.append(apply)
            return {"kind": "ack", "ack_seq": seq}
        if kind == "edit_map":
            region: CellRect | Stroke
            if "rect" in msg:
                x0, y0, x1, y1 = (int(v) for v in msg["rect"])
                region = CellRect(x0, y0, x1, y1)
            elif "stroke" in msg:
                pts = [(float(x), float(y)) for x, y in msg["stroke"]]
                region = Stroke(pts, float(msg.get("width", 3.0)))
            else:
                return {"kind": "fault", "code": "bad_edit",
                        "message": "edit_map needs rect or stroke", "ack_seq": seq}
            value = int(msg.get("value", 255))
            self.commands.append(lambda: self.session.queue_edit(region, value))
            return {"kind": "ack", "ack_seq": seq}
        return None

    def map_payload(self) -> dict:
        """Current map as base64 PGM plus world placement, for hello replies."""
        g = self.map.geometry
        return {"pgm_base64": base64.b64encode(to_pgm_bytes(self.map)).decode("ascii"),
                "resolution": g.resolution, "origin": list(g.origin),
                "width": g.width_cells, "height": g.height_cells}

    # -- asyncio plumbing ------------------------------------------------------------------

    async def start(self, host: str = "127.0.0.1", port: int = 0) -> tuple[str, int]:
        self._stop.clear()
        self._thread = threading.Thread(target=self._loop, daemon=True,
                                        name="gridguide-control")
        self._thread.start()
        self.server = await asyncio.start_server(self._client, host, port)
        addr = self.server.sockets[0].getsockname()
        return addr[0], addr[1]

    async def stop(self) -> None:
        self._stop.set()
        self._paused.set()
        if self.server is not None:
            self.server.close()
            await self.server.wait_closed()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    async def _client(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        try:
            head = await reader.readexactly(4)
        except (asyncio.IncompleteReadError, ConnectionError):
            writer.close()
            return
        if head == b"GET ":
            framing = _WsFraming()
            ok = await framing.handshake(reader, writer, head)
            if not ok:
                writer.close()
                return
        else:
            framing = _RawFraming(head)

        operator = self._operator is None
        if operator:
            self._operator = writer
            self._paused.clear()
        sender = asyncio.create_task(self._send_states(framing, writer))
        try:
            while True:
                payload = await framing.recv(reader, writer)
                if payload is None:
                    break
                try:
                    msg = json.loads(payload)
                    if not isinstance(msg, dict):
                        raise ValueError("message must be an object")
                except ValueError as exc:
                    await framing.send(writer, json.dumps(
                        {"kind": "fault", "code": "bad_json", "message": str(exc)}))
                    continue
                reply = self.handle_message(msg, operator)
                if reply is not None:
                    reply.setdefault("seq", self._next_seq())
                    await framing.send(writer, json.dumps(reply))
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            sender.cancel()
            if operator:
                self._operator = None
                self._paused.set()      # pause with zero commanded velocity
                self._force = (0.0, 0.0)
                self._force_at = -math.inf
            writer.close()

    async def _send_states(self, framing, writer: asyncio.StreamWriter):
        """Forward new frames to this client, tracked by sequence cursor.

        The queues are never popped here so several clients can follow the
        same stream; the deques' maxlen discards history on its own.
        """
        cursor = self._out_seq  # start live, skip buffered history
        try:
            while True:
                fresh = [f for f in list(self.states) if f["seq"] > cursor]
                fresh += [f for f in list(self.faults_out) if f["seq"] > cursor]
                fresh.sort(key=lambda f: f["seq"])
                for frame in fresh:
                    cursor = frame["seq"]
                    await framing.send(writer, json.dumps(frame))
                if fresh:
                    await writer.drain()
                else:
                    await asyncio.sleep(0.002)
        except (ConnectionError, asyncio.CancelledError):
            pass


class _RawFraming:
    """4-byte little-endian length prefix, UTF-8 JSON payload."""

    def __init__(self, first_head: bytes | None = None):
        self._pending_head = first_head

    async def recv(self, reader, writer) -> str | None:
        if self._pending_head is not None:
            head, self._pending_head = self._pending_head, None
        else:
            try:
                head = await reader.readexactly(4)
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
        (length,) = struct.unpack("<I", head)
        if length > 64 * 1024 * 1024:
            return None
        try:
            payload = await reader.readexactly(length)
        except (asyncio.IncompleteReadError, ConnectionError):
            return None
        return payload.decode("utf-8", errors="replace")

    async def send(self, writer, text: str) -> None:
        data = text.encode("utf-8")
        writer.write(struct.pack("<I", len(data)) + data)


class _WsFraming:
    """Server side of RFC 6455, text frames only, no extensions."""

    async def handshake(self, reader, writer, head: bytes) -> bool:
        request = head + await reader.readuntil(b"\r\n\r\n")
        key = None
        for line in request.split(b"\r\n"):
            if line.lower().startswith(b"sec-websocket-key:"):
                key = line.split(b":", 1)[1].strip().decode("ascii")
        if key is None:
            writer.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            return False
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()).decode("ascii")
        writer.write(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\nConnection: Upgrade\r\n"
            b"Sec-WebSocket-Accept: " + accept.encode("ascii") + b"\r\n\r\n")
        await writer.drain()
        return True

    async def recv(self, reader, writer) -> str | None:
        buffer = b""
        while True:
            try:
                b0, b1 = await reader.readexactly(2)
            except (asyncio.IncompleteReadError, ConnectionError):
                return None
            opcode = b0 & 0x0F
            masked = b1 & 0x80
            length = b1 & 0x7F
            if length == 126:
                (length,) = struct.unpack(">H", await reader.readexactly(2))
            elif length == 127:
                (length,) = struct.unpack(">Q", await reader.readexactly(8))
            mask = await reader.readexactly(4) if masked else b"\x00" * 4
            data = await reader.readexactly(length)
            if masked:
                data = bytes(c ^ mask[i % 4] for i, c in enumerate(data))
            if opcode == 0x8:          # close
                await self._send_raw(writer, 0x8, b"")
                return None
            if opcode == 0x9:          # ping -> pong
                await self._send_raw(writer, 0xA, data)
                continue
            if opcode in (0x1, 0x2, 0x0):
                buffer += data
                if b0 & 0x80:          # FIN
                    return buffer.decode("utf-8", errors="replace")

    async def send(self, writer, text: str) -> None:
        await self._send_raw(writer, 0x1, text.encode("utf-8"))

    async def _send_raw(self, writer, opcode: int, data: bytes) -> None:
        head = bytes([0x80 | opcode])
        n = len(data)
        if n < 126:
            head += bytes([n])
        elif n < 65536:
            head += bytes([126]) + struct.pack(">H", n)
        else:
            head += bytes([127]) + struct.pack(">Q", n)
        writer.write(head + data)


def serve_forever(host: str, port: int, cfg: ServiceConfig) -> None:
    async def main():
        svc = SessionService(cfg)
        h, p = await svc.start(host, port)
        print(f"session service listening on {h}:{p} "
              f"(raw framing and WebSocket on the same port)")
        try:
            await asyncio.Event().wait()
        finally:
            await svc.stop()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass


# --- small synchronous client for tests and scripted sessions ---------------------

class ServiceClient:
    """Blocking raw-framing client; enough for scripts and tests."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        import socket
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.seq = 0
        self._buf = b""

    def send(self, msg: dict) -> int:
        self.seq += 1
        msg = {**msg, "seq": self.seq}
        data = json.dumps(msg).encode("utf-8")
        self.sock.sendall(struct.pack("<I", len(data)) + data)
        return self.seq

    def recv(self) -> dict:
        head = self._read(4)
        (length,) = struct.unpack("<I", head)
        return json.loads(self._read(length).decode("utf-8"))

    def recv_until(self, kind: str, limit: int = 1000) -> dict:
        for _ in range(limit):
            msg = self.recv()
            if msg.get("kind") == kind:
                return msg
        raise TimeoutError(f"no {kind!r} message within {limit} frames")

    def _read(self, n: int) -> bytes:
        while len(self._buf) < n:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise ConnectionError("server closed")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def close(self) -> None:
        self.sock.close()
