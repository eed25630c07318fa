"""Grid-based motion restriction control for a planar rehabilitation device.

The package provides occupancy-grid restriction maps, the implicit-Euler
velocity controller that confines motion to them, admittance and impedance
virtual dynamics, a simulated non-backdrivable plant, session orchestration
for the operating modes, a benchmark harness, and a live session service.
"""

__version__ = "0.1.0"

from .admittance import AdmittanceParams, AdmittanceState, admittance_step
from .geometry import GridGeometry, benchmark_geometry, default_geometry
from .ievc import (IevcConfig, IevcResult, KinematicState, RingTemplate,
                   circle_map, find_intersections, ievc_step)
from .impedance import (ConvolutionKernel, ImpedanceParams, SpringForceMap,
                        build_spring_map, depth_profile_1d, expand_map,
                        impedance_step, load_spring_map, store_spring_map)
from .plant import PlantParams, PlantState, SensorModel, plant_step, sensor_read
from .restriction import (CellRect, ImplicitCurveSpec, MotionRestrictionMap,
                          RegionInequalitySpec, Stroke, edit_region, load_pgm,
                          map_from_implicit, map_from_inequalities,
                          rom_from_trace, store_pgm)
from .session import Mode, Session, SessionTrace, run_session

__all__ = [name for name in dir() if not name.startswith("_")]
