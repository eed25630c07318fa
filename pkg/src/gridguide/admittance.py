"""Admittance virtual dynamics: measured force to desired velocity.

Simulates an adjustable mass on a rough plane with viscous damping. The
force-to-velocity integrator is the bilinear (Tustin) discretization of
1/(m_v k_r s), i.e. trapezoidal integration of force, so the mapping is
exact for constant force and second-order accurate for smooth profiles.
Internally SI (m/s, N, kg); callers working in millimeters convert at the
boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

GRAVITY = 9.8  # m/s^2, fixed for bit-comparable runs


class NonFiniteForceError(ValueError):
    """Input force has NaN/inf components; the step must be rejected."""


@dataclass
class AdmittanceParams:
    virtual_mass: float = 10.0     # kg
    damping: float = 0.0           # N*s/m, velocity-proportional
    friction_coeff: float = 0.02   # dimensionless Coulomb coefficient
    transmission_ratio: float = 1.0
    timestep: float = 1e-3         # s

    def __post_init__(self) -> None:
        if not self.virtual_mass > 0:
            raise ValueError("virtual_mass must be positive")
        if not self.timestep > 0:
            raise ValueError("timestep must be positive")
        if not self.transmission_ratio > 0:
            raise ValueError("transmission_ratio must be positive")
        if self.friction_coeff < 0 or self.damping < 0:
            raise ValueError("friction_coeff and damping must be non-negative")

    @property
    def mobility(self) -> float:
        """Velocity gained per unit force per step: T_s / (m_v * k_r)."""
        return self.timestep / self.virtual_mass / self.transmission_ratio


@dataclass
class AdmittanceState:
    """Force and velocity remembered from the previous step (SI units)."""

    force: tuple[float, float] = (0.0, 0.0)
    velocity: tuple[float, float] = (0.0, 0.0)


def admittance_step(force: tuple[float, float], state: AdmittanceState,
                    p: AdmittanceParams) -> tuple[float, float]:
    """Advance the virtual dynamics one step and return desired velocity (m/s).

    Damping and trapezoidal force integration act per axis; Coulomb friction
    subtracts from the speed magnitude along the current direction and clamps
    at zero, so friction never reverses motion. Updates ``state`` in place.
    Raises NonFiniteForceError (leaving state untouched) on bad input.
    """
    fx, fy = force
    if not (math.isfinite(fx) and math.isfinite(fy)):
        raise NonFiniteForceError(f"non-finite force ({fx}, {fy})")
    ym = p.mobility
    damp = 1.0 - p.damping * ym
    vx = state.velocity[0] * damp + (fx + state.force[0]) * 0.5 * ym
    vy = state.velocity[1] * damp + (fy + state.force[1]) * 0.5 * ym
    speed = math.hypot(vx, vy)
    if speed > 0.0 and p.friction_coeff > 0.0:
        scale = max(0.0, speed - p.virtual_mass * GRAVITY * p.friction_coeff * ym) / speed
        vx *= scale
        vy *= scale
    state.force = (fx, fy)
    state.velocity = (vx, vy)
    return (vx, vy)
