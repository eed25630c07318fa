"""Simulated non-backdrivable plant and scripted force sources.

Two screw-driven axes track a commanded velocity under speed and
acceleration limits; applied force never reaches the motion path (the
transmission is non-backdrivable), it only shows up at the force sensor.
Defaults derive from an 80 rev/s, 800 rev/s^2 actuator on a 2 mm/rev screw.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable


@dataclass
class PlantParams:
    max_speed: float = 160.0      # mm/s per axis (80 rev/s * 2 mm/rev)
    max_accel: float = 1600.0     # mm/s^2 per axis (800 rev/s^2 * 2 mm/rev)
    screw_pitch: float = 2.0      # mm/rev, informational
    timestep: float = 1e-3        # s
    lag_time_constant: float = 0.0  # s; 0 = ideal rate-limited tracking

    def __post_init__(self) -> None:
        if not (self.max_speed > 0 and self.max_accel > 0 and self.timestep > 0):
            raise ValueError("max_speed, max_accel and timestep must be positive")


@dataclass
class PlantState:
    position: tuple[float, float] = (0.0, 0.0)   # mm
    velocity: tuple[float, float] = (0.0, 0.0)   # mm/s
    commanded: tuple[float, float] = (0.0, 0.0)  # mm/s


def _track_axis(v: float, cmd: float, p: PlantParams) -> float:
    cmd = min(max(cmd, -p.max_speed), p.max_speed)
    if p.lag_time_constant > 0.0:
        cmd = v + (1.0 - math.exp(-p.timestep / p.lag_time_constant)) * (cmd - v)
    budget = p.max_accel * p.timestep
    return v + min(max(cmd - v, -budget), budget)


def plant_step(v_cmd: tuple[float, float], state: PlantState,
               p: PlantParams) -> PlantState:
    """Advance one step: clamp command, rate-limit velocity, integrate
    position trapezoidally. Force plays no part here by construction."""
    vx = _track_axis(state.velocity[0], v_cmd[0], p)
    vy = _track_axis(state.velocity[1], v_cmd[1], p)
    half = 0.5 * p.timestep
    return PlantState(
        position=(state.position[0] + (state.velocity[0] + vx) * half,
                  state.position[1] + (state.velocity[1] + vy) * half),
        velocity=(vx, vy),
        commanded=(float(v_cmd[0]), float(v_cmd[1])),
    )


@dataclass
class SensorModel:
    """Load-cell stand-in: true force plus bounded uniform noise per axis."""

    noise_magnitude: float = 0.0  # N, uniform in [-mag, +mag]
    seed: int = 0
    _rng: random.Random = field(init=False, repr=False)
    samples: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        if self.noise_magnitude < 0:
            raise ValueError("noise_magnitude must be >= 0")
        self._rng = random.Random(self.seed)

    def read(self, true_force: tuple[float, float]) -> tuple[float, float]:
        self.samples += 1
        if self.noise_magnitude == 0.0:
            return (true_force[0], true_force[1])
        m = self.noise_magnitude
        return (true_force[0] + self._rng.uniform(-m, m),
                true_force[1] + self._rng.uniform(-m, m))

    def reset(self) -> None:
        self._rng = random.Random(self.seed)
        self.samples = 0


def sensor_read(true_force: tuple[float, float], model: SensorModel) -> tuple[float, float]:
    return model.read(true_force)


# --- scripted force sources --------------------------------------------------
# Stand-ins for the human hand on the handle. Each is a callable
# (t, position_mm, velocity_mms) -> force N.

ForceSource = Callable[[float, tuple[float, float], tuple[float, float]],
                       tuple[float, float]]


def zero_force(t, pos, vel) -> tuple[float, float]:
    return (0.0, 0.0)


def constant_force(fx: float, fy: float) -> ForceSource:
    return lambda t, pos, vel: (fx, fy)


def viscous_drag(coeff: float) -> ForceSource:
    """Resistive user: force opposing motion, ``coeff`` N per mm/s."""
    return lambda t, pos, vel: (-coeff * vel[0], -coeff * vel[1])


def _cap(fx: float, fy: float, cap: float) -> tuple[float, float]:
    mag = math.hypot(fx, fy)
    if mag > cap:
        s = cap / mag
        return (fx * s, fy * s)
    return (fx, fy)


@dataclass
class PDChase:
    """PD pull toward a moving target, saturated at a human-strength cap.

    ``target`` maps time to a world point; its velocity is estimated by a
    finite difference so the derivative term anticipates target motion.
    """

    target: Callable[[float], tuple[float, float]]
    kp: float = 0.5     # N/mm
    kd: float = 0.0     # N*s/mm
    cap: float = 30.0   # N
    tremor: float = 0.0  # N, uniform per-axis jitter
    seed: int = 1

    def __post_init__(self) -> None:
        self._rng = random.Random(self.seed)

    def __call__(self, t, pos, vel) -> tuple[float, float]:
        tx, ty = self.target(t)
        fx = self.kp * (tx - pos[0])
        fy = self.kp * (ty - pos[1])
        if self.kd:
            dt = 1e-3
            tx2, ty2 = self.target(t + dt)
            fx += self.kd * ((tx2 - tx) / dt - vel[0])
            fy += self.kd * ((ty2 - ty) / dt - vel[1])
        if self.tremor:
            fx += self._rng.uniform(-self.tremor, self.tremor)
            fy += self._rng.uniform(-self.tremor, self.tremor)
        return _cap(fx, fy, self.cap)


def circle_target(center: tuple[float, float], radius: float,
                  angular_speed: float, phase: float = 0.0) -> Callable[[float], tuple[float, float]]:
    def target(t: float) -> tuple[float, float]:
        a = phase + angular_speed * t
        return (center[0] + radius * math.cos(a), center[1] + radius * math.sin(a))
    return target


def path_target(points, speed: float, loop: bool = False) -> Callable[[float], tuple[float, float]]:
    """Point marching along a polyline at constant arc-length speed."""
    pts = [(float(x), float(y)) for x, y in points]
    if loop and pts[0] != pts[-1]:
        pts.append(pts[0])
    seg_len = [math.dist(a, b) for a, b in zip(pts[:-1], pts[1:])]
    total = sum(seg_len)
    if total == 0.0:
        return lambda t: pts[0]

    def target(t: float) -> tuple[float, float]:
        s = speed * t
        s = s % total if loop else min(s, total)
        for (a, b), length in zip(zip(pts[:-1], pts[1:]), seg_len):
            if s <= length or length == 0.0:
                u = 0.0 if length == 0.0 else s / length
                return (a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]))
            s -= length
        return pts[-1]

    return target
