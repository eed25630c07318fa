"""Control-loop sessions: mode pipelines composed against the simulated plant.

Pipelines per mode (all ending in the motion restriction controller and the
plant):

* powered      — speed regulator along the current heading; force ignored.
* transparent  — sensed force -> admittance -> restriction. Identical control
                 path for the hard-boundary assisted mode; only the label
                 differs, so their traces match bit for bit.
* aan_soft     — sensed force -> impedance (spring force map) -> admittance
                 -> restriction against the expanded map.
* guided       — impedance spring anchored to a leading point marching along
                 a path, then admittance -> restriction (expanded map).

The loop is single-threaded and deterministic; external edits and commands
queue up and apply between steps. The admittance state velocity is re-synced
to the restricted command every step, which is what makes boundary contact
shed momentum instead of banking it.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .admittance import AdmittanceParams, AdmittanceState, NonFiniteForceError, admittance_step
from .geometry import GridGeometry
from .ievc import IevcConfig, IevcResult, KinematicState, ievc_step
from .impedance import (ConvolutionKernel, ExpandedMap, ImpedanceParams, SpringForceMap,
                        StaleMapError, build_spring_map, expand_map, impedance_step)
from .plant import PlantParams, PlantState, SensorModel, ForceSource, plant_step, zero_force
from .restriction import PERMITTED, CellRect, MotionRestrictionMap, Stroke, edit_region


class Mode(str, enum.Enum):
    POWERED = "powered"
    TRANSPARENT = "transparent"
    AAN_HARD = "aan_hard"
    AAN_SOFT = "aan_soft"
    GUIDED = "guided"


TRACE_COLUMNS = ("t", "px", "py", "vx", "vy", "cmdx", "cmdy",
                 "fx", "fy", "fox", "foy", "rev")


@dataclass
class SessionTrace:
    """Per-step records of a run; one row per control step."""

    timestep: float
    mode: str
    data: np.ndarray  # (n, 12) float64, columns TRACE_COLUMNS

    def __len__(self) -> int:
        return len(self.data)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, TRACE_COLUMNS.index(name)]

    def positions(self) -> np.ndarray:
        return self.data[:, 1:3]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.data, fmt="%.10g", delimiter=",",
                   header=",".join(TRACE_COLUMNS), comments="")


@dataclass
class SessionFault:
    step: int
    code: str
    message: str


class Session:
    """One configured control session stepping at a fixed T_s."""

    def __init__(self, mode: Mode | str, restriction: MotionRestrictionMap, *,
                 admittance: AdmittanceParams | None = None,
                 impedance: ImpedanceParams | None = None,
                 ievc: IevcConfig | None = None,
                 plant: PlantParams | None = None,
                 noise: float = 0.0, seed: int = 0,
                 powered_speed: float = 50.0,
                 guided_path: Sequence[tuple[float, float]] | None = None,
                 guided_loop: bool = False,
                 leading_speed: float = 30.0,
                 start: tuple[float, float] | None = None,
                 speed_limit: float | None = None,
                 assist_map: MotionRestrictionMap | None = None,
                 expanded: ExpandedMap | None = None,
                 spring: SpringForceMap | None = None):
        self.mode = Mode(mode)
        self.map = restriction
        geom = restriction.geometry
        self.plant_params = plant or PlantParams()
        ts = self.plant_params.timestep
        self.admittance_params = admittance or AdmittanceParams(timestep=ts)
        if not math.isclose(self.admittance_params.timestep, ts):
            raise ValueError("admittance and plant timesteps must agree")
        self.ievc = ievc or IevcConfig.from_lookahead(resolution=geom.resolution)
        self.impedance_params = impedance
        self.sensor = SensorModel(noise_magnitude=noise, seed=seed)
        self.powered_speed = float(powered_speed)
        self.leading_speed = float(leading_speed)
        # Command the plant only what it can do; the virtual mass otherwise
        # banks unreachable speed and the lookahead ring balloons with it.
        self.speed_limit = float(speed_limit if speed_limit is not None
                                 else self.plant_params.max_speed)

        # Assistance derives from assist_map (defaults to the restriction map
        # itself); a separate source models setups like a point attractor
        # inside a wide-open training area.
        self.assist_map = assist_map if assist_map is not None else restriction
        self.expanded: ExpandedMap | None = None
        self.spring: SpringForceMap | None = None
        self.point_spring: SpringForceMap | None = None
        if self.mode in (Mode.AAN_SOFT, Mode.GUIDED):
            if self.impedance_params is None:
                raise ValueError(f"{self.mode.value} needs impedance parameters")
            if expanded is not None and spring is not None:
                # Prebuilt pieces (shared across sessions or loaded from files).
                if expanded.kernel_radius != self.impedance_params.kernel_radius:
                    raise ValueError("prebuilt expansion kernel does not match params")
                self.expanded = expanded
                self.spring = spring
            else:
                self._rebuild_spring()
        if self.mode is Mode.GUIDED:
            if guided_path is None:
                raise ValueError("guided mode needs a path")
            from .plant import path_target
            self._leading = path_target(guided_path, self.leading_speed, loop=guided_loop)
            self.point_spring = _point_spring(geom, self.impedance_params)

        self.plant = PlantState(position=start or (0.0, 0.0))
        self.adm_state = AdmittanceState()
        self.heading = (0.0, 0.0)
        self.v_cmd = (0.0, 0.0)
        self.v_desired = (0.0, 0.0)  # admittance output before restriction, mm/s
        self.step_index = 0
        self.stranded = False
        self.faults: list[SessionFault] = []
        self._queue: deque = deque()

    # -- configuration plumbing ------------------------------------------------

    @property
    def timestep(self) -> float:
        return self.plant_params.timestep

    @property
    def active_map(self) -> MotionRestrictionMap:
        """Map the restriction controller runs against (expanded when soft)."""
        if self.mode in (Mode.AAN_SOFT, Mode.GUIDED):
            assert self.expanded is not None
            return self.expanded
        return self.map

    def _rebuild_spring(self) -> None:
        assert self.impedance_params is not None
        kernel = ConvolutionKernel(self.impedance_params.kernel_radius)
        self.expanded = expand_map(self.map, kernel)
        if self.assist_map is self.map:
            self.spring = build_spring_map(self.expanded, kernel, self.impedance_params)
        else:
            assist_expanded = expand_map(self.assist_map, kernel)
            self.spring = build_spring_map(assist_expanded, kernel, self.impedance_params)

    def _check_spring_fresh(self) -> None:
        if self.mode is Mode.AAN_SOFT:
            assert self.spring is not None
            if self.spring.source_revision != self.assist_map.revision:
                raise StaleMapError(
                    f"spring map built at revision {self.spring.source_revision}, "
                    f"assistance source map now at {self.assist_map.revision}")

    def queue_edit(self, region: CellRect | Stroke, value: int = PERMITTED) -> None:
        """Queue a map edit; it applies atomically at the next step boundary."""
        self._queue.append(("edit", region, value))

    def queue_command(self, fn: Callable[["Session"], None]) -> None:
        self._queue.append(("call", fn))

    def _drain_queue(self) -> None:
        while self._queue:
            item = self._queue.popleft()
            if item[0] == "edit":
                edit_region(self.map, item[1], item[2])
                if self.mode in (Mode.AAN_SOFT, Mode.GUIDED):
                    self._rebuild_spring()
            else:
                item[1](self)

    # -- per-mode command computation -------------------------------------------

    def _bootstrap_heading(self) -> tuple[float, float]:
        px, py = self.plant.position
        cx, cy = self.map.geometry.world_to_cell(px, py)
        if not self.map.is_permitted(cx, cy):
            target = _nearest_permitted(self.active_map, (cx, cy))
            if target is not None:
                wx, wy = self.map.geometry.cell_to_world(*target)
                norm = math.hypot(wx - px, wy - py)
                if norm > 0:
                    return ((wx - px) / norm, (wy - py) / norm)
        return (1.0, 0.0)

    def _restrict(self, vx: float, vy: float) -> IevcResult:
        speed = math.hypot(vx, vy)
        if speed > self.speed_limit:
            s = self.speed_limit / speed
            vx *= s
            vy *= s
        res = ievc_step(KinematicState(self.plant.position, (vx, vy)),
                        self.active_map, self.ievc)
        self.stranded = res.stranded
        if res.stranded:
            self.faults.append(SessionFault(self.step_index, "stranded",
                                            "no reachable permitted cell"))
        return res

    def _powered_cmd(self) -> tuple[float, float]:
        sd = self.powered_speed
        if sd <= 0.0:
            return (0.0, 0.0)
        if self.heading == (0.0, 0.0):
            self.heading = self._bootstrap_heading()
        hx, hy = self.heading
        res = self._restrict(sd * hx, sd * hy)
        vx, vy = res.velocity
        if vx == 0.0 and vy == 0.0 and not res.stranded:
            # Dead end or boundary-perpendicular heading: walk the compass.
            self.heading = (-hy, hx)
            res = self._restrict(sd * self.heading[0], sd * self.heading[1])
            vx, vy = res.velocity
        speed = math.hypot(vx, vy)
        if speed > 0.0:
            self.heading = (vx / speed, vy / speed)
        return (vx, vy)

    def _admit_and_restrict(self, f_o: tuple[float, float]) -> tuple[float, float]:
        try:
            vms = admittance_step(f_o, self.adm_state, self.admittance_params)
        except NonFiniteForceError as exc:
            self.faults.append(SessionFault(self.step_index, "bad_force", str(exc)))
            vms = self.adm_state.velocity
        self.v_desired = (vms[0] * 1e3, vms[1] * 1e3)
        res = self._restrict(self.v_desired[0], self.v_desired[1])
        return res.velocity

    def _guided_assist(self, f_smp: tuple[float, float]) -> tuple[float, float]:
        assert self.point_spring is not None and self.impedance_params is not None
        lx, ly = self._leading(self.step_index * self.timestep)
        geom = self.map.geometry
        pcx, pcy = geom.world_to_cell(*self.plant.position)
        lcx, lcy = geom.world_to_cell(lx, ly)
        center = self.point_spring.geometry.width_cells // 2
        cell = (pcx - lcx + center, pcy - lcy + center)
        return impedance_step(f_smp, self.v_cmd, cell, self.point_spring,
                              self.impedance_params)

    # -- stepping ---------------------------------------------------------------

    def step(self, force: ForceSource = zero_force,
              record: np.ndarray | None = None) -> tuple[float, float]:
        """Advance one control step; returns the commanded velocity (mm/s)."""
        self._drain_queue()
        t = self.step_index * self.timestep
        pos = self.plant.position
        vel = self.plant.velocity

        if self.mode is Mode.POWERED:
            f_smp = (0.0, 0.0)  # force path unused by design
            f_o = (0.0, 0.0)
            v_cmd = self._powered_cmd()
        else:
            f_smp = self.sensor.read(force(t, pos, vel))
            if self.mode is Mode.AAN_SOFT:
                self._check_spring_fresh()
                assert self.spring is not None and self.impedance_params is not None
                cell = self.map.geometry.world_to_cell(*pos)
                f_o = impedance_step(f_smp, self.v_cmd, cell, self.spring,
                                     self.impedance_params)
            elif self.mode is Mode.GUIDED:
                f_o = self._guided_assist(f_smp)
            else:  # transparent / aan_hard share one path
                f_o = f_smp
            v_cmd = self._admit_and_restrict(f_o)

        self.v_cmd = v_cmd
        if record is not None:
            record[0] = t
            record[1] = pos[0]
            record[2] = pos[1]
            record[3] = vel[0]
            record[4] = vel[1]
            record[5] = v_cmd[0]
            record[6] = v_cmd[1]
            record[7] = f_smp[0]
            record[8] = f_smp[1]
            record[9] = f_o[0]
            record[10] = f_o[1]
            record[11] = self.map.revision
        self.plant = plant_step(v_cmd, self.plant, self.plant_params)
        if self.mode is not Mode.POWERED:
            # Velocity feedback: the virtual mass state follows the measured
            # end-effector velocity, so boundary contact sheds its momentum
            # and the model can never bank speed the plant does not have.
            pv = self.plant.velocity
            self.adm_state.velocity = (pv[0] * 1e-3, pv[1] * 1e-3)
        self.step_index += 1
        return v_cmd

    def run(self, duration: float, force: ForceSource = zero_force,
            record_trace: bool = True) -> SessionTrace:
        """Run for ``duration`` seconds; returns one trace row per step."""
        n = int(round(duration / self.timestep))
        data = np.empty((n if record_trace else 0, 12), dtype=float)
        if record_trace:
            for k in range(n):
                self.step(force, record=data[k])
        else:
            for _ in range(n):
                self.step(force)
        return SessionTrace(self.timestep, self.mode.value, data)


def run_session(session: Session, duration: float,
                force: ForceSource = zero_force) -> SessionTrace:
    return session.run(duration, force)


def _nearest_permitted(m: MotionRestrictionMap, cell: tuple[int, int]) -> tuple[int, int] | None:
    hits = np.argwhere(m.cells != 0)
    if len(hits) == 0:
        return None
    d2 = (hits[:, 1] - cell[0]) ** 2 + (hits[:, 0] - cell[1]) ** 2
    cy, cx = hits[np.argmin(d2)]
    return (int(cx), int(cy))


def _point_spring(geom: GridGeometry, p: ImpedanceParams) -> SpringForceMap:
    """Canonical single-point attractor field, looked up at a shifted offset
    to anchor the spring on a moving leading point."""
    size = 4 * p.kernel_radius + 9
    sub = GridGeometry(size, size, geom.resolution,
                       (-(size // 2) * geom.resolution, -(size // 2) * geom.resolution))
    m = MotionRestrictionMap.empty(sub)
    m.cells[size // 2, size // 2] = PERMITTED
    kernel = ConvolutionKernel(p.kernel_radius)
    return build_spring_map(expand_map(m, kernel), kernel, p)
