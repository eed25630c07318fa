"""Command-line interface: map tooling, spring-map builds, benchmarks, service."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import click
import numpy as np

from .geometry import GridGeometry, default_geometry
from .impedance import ConvolutionKernel, ImpedanceParams, build_spring_map, expand_map, store_spring_map
from .restriction import (CellRect, ImplicitCurveSpec, MotionRestrictionMap, Stroke,
                          edit_region, load_pgm, map_from_implicit, rom_from_trace,
                          store_pgm)


def _geometry(size: str | None, res: float, origin: str | None) -> GridGeometry:
    if size is None:
        return default_geometry() if res == 1.0 and origin is None else _build(650, 550, res, origin)
    w, h = (int(v) for v in size.split(","))
    return _build(w, h, res, origin)


def _build(w: int, h: int, res: float, origin: str | None) -> GridGeometry:
    if origin is None:
        o = (-(w // 2) * res, -(h // 2) * res)
    else:
        ox, oy = (float(v) for v in origin.split(","))
        o = (ox, oy)
    return GridGeometry(w, h, res, o)


_EXPR_NAMES = {name: getattr(np, name) for name in
               ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "hypot",
                "minimum", "maximum", "arctan2", "pi", "e")}


def _implicit_fn(expr: str):
    code = compile(expr, "<implicit>", "eval")

    def f(x, y):
        return eval(code, {"__builtins__": {}}, {**_EXPR_NAMES, "x": x, "y": y})

    return f


@click.group()
def main():
    """Grid-based motion-restriction control toolkit."""


@main.group("map")
def map_group():
    """Generate and edit motion restriction maps (PGM files)."""


@map_group.command("gen")
@click.option("--implicit", "expr", help="f(x, y) expression in mm; band where |f| < ES")
@click.option("--es", type=float, default=None, help="band half-width in f units")
@click.option("--rom", "rom_csv", type=click.Path(exists=True),
              help="CSV of x,y trace points; fills the swept region")
@click.option("--size", help="grid W,H in cells (default 650,550)")
@click.option("--res", type=float, default=1.0, show_default=True, help="mm per cell")
@click.option("--origin", help="world mm of cell (0,0) center, as 'x,y'")
@click.option("--out", required=True, type=click.Path())
def map_gen(expr, es, rom_csv, size, res, origin, out):
    """Generate a map from an implicit curve band or a recorded trace."""
    geom = _geometry(size, res, origin)
    if (expr is None) == (rom_csv is None):
        raise click.UsageError("need exactly one of --implicit or --rom")
    if expr is not None:
        if es is None:
            raise click.UsageError("--implicit needs --es")
        m = map_from_implicit(ImplicitCurveSpec(_implicit_fn(expr), es), geom)
    else:
        with open(rom_csv, newline="") as fh:
            pts = [(float(r[0]), float(r[1])) for r in csv.reader(fh) if r]
        m = rom_from_trace(pts, geom)
    store_pgm(m, out)
    click.echo(f"wrote {out}: {m.geometry.width_cells}x{m.geometry.height_cells}, "
               f"{m.permitted_count()} permitted cells")


@map_group.command("edit")
@click.option("--in", "src", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), help="default: overwrite --in")
@click.option("--rect", help="cell rectangle x0,y0,x1,y1")
@click.option("--stroke", help="world polyline 'x1,y1 x2,y2 ...' (mm)")
@click.option("--width", type=float, default=3.0, show_default=True,
              help="stroke width in cells")
@click.option("--value", type=click.IntRange(0, 255), default=255, show_default=True,
              help="0 = prohibited, nonzero = permitted")
@click.option("--res", type=float, default=1.0, show_default=True)
def map_edit(src, out, rect, stroke, width, value, res):
    """Set a rectangle or stroked polyline to permitted/prohibited."""
    m = load_pgm(src, res)
    if (rect is None) == (stroke is None):
        raise click.UsageError("need exactly one of --rect or --stroke")
    if rect is not None:
        x0, y0, x1, y1 = (int(v) for v in rect.split(","))
        edit_region(m, CellRect(x0, y0, x1, y1), value)
    else:
        pts = [tuple(float(v) for v in p.split(",")) for p in stroke.split()]
        edit_region(m, Stroke(pts, width), value)
    store_pgm(m, out or src)
    click.echo(f"wrote {out or src} (revision {m.revision})")


@main.group("impedance")
def impedance_group():
    """Spring force map tooling."""


@impedance_group.command("build")
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--kernel-radius", type=int, required=True, help="disk radius in cells")
@click.option("--lmax", type=float, default=None,
              help="force zone width in mm (must equal 2 * radius * res)")
@click.option("--res", type=float, default=1.0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def impedance_build(map_path, kernel_radius, lmax, res, out):
    """Precompute the penetration-depth field for a restriction map."""
    m = load_pgm(map_path, res)
    params = ImpedanceParams.for_geometry(m.geometry, spring_stiffness=1.0,
                                          kernel_radius=kernel_radius)
    if lmax is not None and not math.isclose(lmax, params.zone_width, rel_tol=1e-9):
        raise click.UsageError(
            f"--lmax {lmax} inconsistent with kernel radius {kernel_radius} "
            f"at {res} mm/cell (zone width is {params.zone_width})")
    kernel = ConvolutionKernel(kernel_radius)
    spr = build_spring_map(expand_map(m, kernel), kernel, params)
    store_spring_map(spr, out)
    click.echo(f"wrote {out}: zone width {spr.zone_width} mm, "
               f"max depth {spr.depth.max():.3f} mm")


@main.command("bench")
@click.argument("experiment",
                type=click.Choice(["fig6", "table2", "table3", "fig10", "complexity", "all"]))
@click.option("--out", "out_dir", type=click.Path(), default="bench_out", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench(experiment, out_dir, seed):
    """Run quantitative experiments; writes CSV metrics and PNG figures."""
    from .bench import ALL_EXPERIMENTS, run_experiments
    names = list(ALL_EXPERIMENTS) if experiment == "all" else [experiment]
    reports = run_experiments(names, Path(out_dir), seed=seed)
    failed = [n for n, r in reports.items() if not r.passed]
    if failed:
        raise SystemExit(f"failed experiments: {', '.join(failed)}")


@main.command("serve")
@click.option("--bind", default="127.0.0.1:7345", show_default=True,
              help="address:port; accepts raw-framing and WebSocket clients")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="session config file (INI sections)")
def serve(bind, config_path):
    """Run the live session service."""
    from .config import load_service_config
    from .service import ServiceConfig, serve_forever
    cfg = load_service_config(config_path) if config_path else ServiceConfig()
    host, port = bind.rsplit(":", 1)
    serve_forever(host, int(port), cfg)


if __name__ == "__main__":
    main()
