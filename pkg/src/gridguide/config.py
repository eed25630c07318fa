"""Session config files: INI sections mapped onto service/session parameters.

Example::

    [session]
    mode = transparent
    map = maps/band.pgm
    resolution = 1.0
    seed = 7
    noise = 0.0
    powered_speed = 50
    lookahead_s = 0.075

    [admittance]
    virtual_mass = 10.0
    friction_coeff = 0.02

    [impedance]
    spring_stiffness = 0.2
    kernel_radius = 6

    [plant]
    max_speed = 160
    max_accel = 1600
    timestep = 0.001
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .service import ServiceConfig

_SESSION_FIELDS = {
    "mode": str,
    "map": str,
    "resolution": float,
    "decimation": int,
    "force_stale_s": float,
    "force_cap": float,
    "seed": int,
    "noise": float,
    "powered_speed": float,
    "lookahead_s": float,
}


def _typed_section(parser: configparser.ConfigParser, name: str) -> dict:
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        try:
            value: object = int(raw)
        except ValueError:
            try:
                value = float(raw)
            except ValueError:
                value = raw
        out[key] = value
    return out


def load_service_config(path) -> ServiceConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")
    cfg = ServiceConfig()
    if parser.has_section("session"):
        for key, caster in _SESSION_FIELDS.items():
            if parser.has_option("session", key):
                raw = parser.get("session", key)
                if key == "map":
                    cfg.map_path = str(Path(path).parent / raw)
                else:
                    setattr(cfg, key, caster(raw))
    cfg.admittance = _typed_section(parser, "admittance")
    cfg.impedance = _typed_section(parser, "impedance")
    cfg.plant = _typed_section(parser, "plant")
    return cfg
