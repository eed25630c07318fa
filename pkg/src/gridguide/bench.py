"""Benchmark harness: quantitative experiments with CSV + figure reports.

Each experiment runs seed-deterministic closed-loop sessions, writes one CSV
of metrics and one PNG figure into the output directory, prints a pass/fail
line per metric, and returns an ExperimentReport. Human subjects are replaced
by scripted force sources, so thresholds here are set an order looser than
hardware-measured values where applicable; the comparable hardware numbers
are carried in the CSV ``reference`` column.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .admittance import AdmittanceParams
from .geometry import GridGeometry, default_geometry
from .ievc import IevcConfig
from .impedance import ConvolutionKernel, ImpedanceParams, build_spring_map, expand_map, impedance_step
from .metrics import distance_outside, lap_slices, linear_fit
from .plant import PDChase, PlantParams, PlantState, circle_target, path_target, plant_step
from .restriction import (ImplicitCurveSpec, MotionRestrictionMap, RegionInequalitySpec,
                          Stroke, edit_region, map_from_implicit, map_from_inequalities)
from .session import Mode, Session


@dataclass
class MetricRow:
    name: str
    value: float
    threshold: str = ""
    ok: bool | None = None
    reference: str = ""

    def line(self) -> str:
        status = "" if self.ok is None else ("PASS" if self.ok else "FAIL")
        ref = f"  [ref {self.reference}]" if self.reference else ""
        thr = f"  (need {self.threshold})" if self.threshold else ""
        return f"{status:4s} {self.name} = {self.value:.6g}{thr}{ref}"


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    rows: list[MetricRow] = field(default_factory=list)
    trace_files: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.ok for r in self.rows if r.ok is not None)

    def add(self, name, value, threshold="", ok=None, reference="") -> MetricRow:
        row = MetricRow(name, float(value), threshold, ok, reference)
        self.rows.append(row)
        return row

    def config_hash(self) -> str:
        blob = json.dumps(self.params, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def write_csv(self, out_dir: Path) -> Path:
        path = out_dir / f"{self.experiment}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["experiment", self.experiment])
            w.writerow(["version", __version__])
            w.writerow(["config_hash", self.config_hash()])
            w.writerow(["params", json.dumps(self.params, default=str)])
            w.writerow([])
            w.writerow(["metric", "value", "threshold", "ok", "reference"])
            for r in self.rows:
                w.writerow([r.name, repr(r.value), r.threshold,
                            "" if r.ok is None else r.ok, r.reference])
        return path

    def print_summary(self) -> None:
        print(f"== {self.experiment} (config {self.config_hash()}) ==")
        for r in self.rows:
            print("  " + r.line())
        print(f"== {self.experiment}: {'PASS' if self.passed else 'FAIL'} ==")


def _figure(out_dir: Path, name: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    out_dir.mkdir(parents=True, exist_ok=True)
    return plt, out_dir / f"{name}.png"


# --- trajectory fixtures ------------------------------------------------------

def circle_band_map(geom: GridGeometry | None = None) -> MotionRestrictionMap:
    geom = geom or default_geometry()
    return map_from_implicit(
        ImplicitCurveSpec(lambda x, y: x ** 2 + y ** 2 - 250.0 ** 2, 500.0), geom)


def infinity_band_map(geom: GridGeometry | None = None) -> MotionRestrictionMap:
    geom = geom or default_geometry()
    f = lambda x, y: (x / 100.0) ** 4 - (x / 100.0) ** 2 + (y / 100.0) ** 2
    return map_from_implicit(ImplicitCurveSpec(f, 0.02), geom)


def _wobbly_loop(seed: int, n: int = 361) -> list[tuple[float, float]]:
    rng = random.Random(seed)
    a3, a5 = rng.uniform(20, 40), rng.uniform(10, 25)
    p3, p5 = rng.uniform(0, 6.28), rng.uniform(0, 6.28)
    pts = []
    for k in range(n):
        th = 2 * math.pi * k / (n - 1)
        r = 150.0 + a3 * math.sin(3 * th + p3) + a5 * math.sin(5 * th + p5)
        pts.append((r * math.cos(th), r * math.sin(th)))
    return pts


def _wavy_line(seed: int, n: int = 201) -> list[tuple[float, float]]:
    rng = random.Random(seed)
    amp, period, phase = rng.uniform(40, 80), rng.uniform(140, 220), rng.uniform(0, 6.28)
    return [(-240.0 + 480.0 * k / (n - 1),
             amp * math.sin(2 * math.pi * (-240.0 + 480.0 * k / (n - 1)) / period + phase))
            for k in range(n)]


def hand_drawn_loop_map(seed: int = 21, geom: GridGeometry | None = None):
    geom = geom or default_geometry()
    m = MotionRestrictionMap.empty(geom)
    pts = _wobbly_loop(seed)
    edit_region(m, Stroke(pts, width_cells=3.0), 255)
    m.revision = 0
    return m, pts


def hand_drawn_line_map(seed: int = 22, geom: GridGeometry | None = None):
    geom = geom or default_geometry()
    m = MotionRestrictionMap.empty(geom)
    pts = _wavy_line(seed)
    edit_region(m, Stroke(pts, width_cells=3.0), 255)
    m.revision = 0
    return m, pts


def open_disk_map(radius=200.0, geom: GridGeometry | None = None) -> MotionRestrictionMap:
    geom = geom or default_geometry()
    return map_from_inequalities(
        RegionInequalitySpec([lambda x, y: x ** 2 + y ** 2 - radius ** 2]), geom)


# --- trajectory-following accuracy (powered mode) ------------------------------

def exp_fig6(out_dir: Path, seed: int = 0) -> ExperimentReport:
    """Powered-mode accuracy on two equation bands and two hand-drawn bands."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = ExperimentReport("fig6", dict(seed=seed, speed=50.0, threshold_mm=0.1))
    loop_map, _ = hand_drawn_loop_map(21 + seed)
    line_map, _ = hand_drawn_line_map(22 + seed)
    cases = [
        ("infinity", infinity_band_map(), (100.0, 0.0), 25.0, "0.00823 mm"),
        ("circle", circle_band_map(), (250.0, 0.0), 3 * 2 * math.pi * 250.0 / 50.0,
         "0.023 mm"),
        ("hand_drawn_loop", loop_map, None, 40.0, "0.00878 mm"),
        ("hand_drawn_line", line_map, None, 25.0, "0.00763 mm"),
    ]
    plt, fig_path = _figure(out_dir, "fig6")
    fig, axes = plt.subplots(2, 2, figsize=(10, 8))
    for ax, (name, m, start, duration, ref) in zip(axes.flat, cases):
        if start is None:
            ys, xs = np.nonzero(m.cells)
            g = m.geometry
            start = g.cell_to_world(int(xs[0]), int(ys[0]))
        s = Session(Mode.POWERED, m, start=start, powered_speed=50.0, seed=seed)
        tr = s.run(duration)
        mae = float(distance_outside(m, tr.positions()).mean())
        rep.add(f"{name}_mae_mm", mae, "<= 0.1", mae <= 0.1, ref)
        trace_file = out_dir / f"fig6_{name}.csv"
        tr.to_csv(trace_file)
        rep.trace_files.append(str(trace_file))
        ys, xs = np.nonzero(m.cells)
        g = m.geometry
        ax.scatter(g.origin[0] + xs * g.resolution, g.origin[1] + ys * g.resolution,
                   s=0.3, c="0.8", label="permitted band")
        p = tr.positions()
        ax.plot(p[:, 0], p[:, 1], lw=0.7, c="tab:red", label="measured")
        ax.set_title(f"{name}: MAE {mae:.4g} mm")
        ax.set_aspect("equal")
        ax.legend(loc="upper right", fontsize=7)
    # zero-speed sanity case
    s0 = Session(Mode.POWERED, circle_band_map(), start=(250.0, 0.0), powered_speed=0.0)
    mae0 = float(distance_outside(circle_band_map(), s0.run(1.0).positions()).mean())
    rep.add("zero_speed_mae_mm", mae0, "== 0", mae0 == 0.0)
    fig.tight_layout()
    fig.savefig(fig_path, dpi=130)
    plt.close(fig)
    rep.write_csv(out_dir)
    rep.print_summary()
    return rep


# --- virtual-mass tracking across masses ----------------------------------------

class VariedPullUser:
    """Circle-following pull with randomized tug episodes.

    Stands in for a human hand: a gentle PD toward a moving circle target
    plus bounded square-pulse tugs whose onsets demand more acceleration
    than the actuators have, which is what separates light virtual masses.
    """

    def __init__(self, seed: int, target, kp=0.3, kd=0.02, cap=30.0,
                 tug_max=22.0, rest_fraction=0.35):
        self._pd = PDChase(target=target, kp=kp, kd=kd, cap=1e9)
        self._rng = random.Random(seed)
        self.cap = cap
        self.tug_max = tug_max
        self.rest_fraction = rest_fraction
        self._until = 0.0
        self._tug = (0.0, 0.0)

    def __call__(self, t, pos, vel):
        if t >= self._until:
            self._until = t + self._rng.uniform(0.1, 0.35)
            if self._rng.random() < self.rest_fraction:
                self._tug = (0.0, 0.0)
            else:
                ang = self._rng.uniform(0, 2 * math.pi)
                mag = self._rng.uniform(0, self.tug_max)
                self._tug = (mag * math.cos(ang), mag * math.sin(ang))
        fx, fy = self._pd(t, pos, vel)
        fx += self._tug[0]
        fy += self._tug[1]
        mag = math.hypot(fx, fy)
        if mag > self.cap:
            fx, fy = fx * self.cap / mag, fy * self.cap / mag
        return (fx, fy)


def _run_mass_case(mass: float, seed: int, duration=20.0):
    m = open_disk_map()
    adm = AdmittanceParams(virtual_mass=mass, friction_coeff=0.02, timestep=1e-3)
    s = Session(Mode.TRANSPARENT, m, admittance=adm, seed=seed, start=(150.0, 0.0))
    user = VariedPullUser(seed + 1, circle_target((0.0, 0.0), 150.0, 0.4))
    n = int(round(duration / s.timestep))
    desired = np.empty((n, 2))
    measured = np.empty((n, 2))
    forces = np.empty(n)
    rec = np.empty(12)
    for k in range(n):
        s.step(user, record=rec)
        desired[k] = s.v_desired
        measured[k] = s.plant.velocity
        forces[k] = math.hypot(rec[7], rec[8])
    err = np.abs(desired - measured)
    return err.mean(axis=0), float(forces.mean())


def exp_table2(out_dir: Path, seed: int = 0,
               masses=(5.0, 10.0, 15.0, 20.0, 25.0, 30.0)) -> ExperimentReport:
    """Velocity-tracking accuracy of the virtual mass across simulated masses."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = ExperimentReport("table2", dict(seed=seed, masses=list(masses)))
    refs_x = {5.0: "2.45", 10.0: "0.75", 15.0: "0.41", 20.0: "0.46",
              25.0: "0.37", 30.0: "0.35"}
    maes = {}
    for mass in masses:
        (mae_x, mae_y), mean_f = _run_mass_case(mass, seed)
        maes[mass] = (mae_x, mae_y)
        rep.add(f"mae_x_{mass:g}kg_mms", mae_x,
                "<= 1" if mass >= 10 else "", mae_x <= 1.0 if mass >= 10 else None,
                refs_x.get(mass, ""))
        rep.add(f"mae_y_{mass:g}kg_mms", mae_y,
                "<= 1" if mass >= 10 else "", mae_y <= 1.0 if mass >= 10 else None)
        rep.add(f"mean_force_{mass:g}kg_N", mean_f, "", None,
                "11.36 N at 30 kg" if mass == 30.0 else "")
    ok_order = maes[5.0][0] > maes[10.0][0] and maes[5.0][1] > maes[10.0][1]
    rep.add("mae_5kg_exceeds_10kg", float(ok_order), "strictly greater", ok_order,
            "2.45 vs 0.75 mm/s")
    seq = [maes[m][0] for m in masses]
    monotone = all(b <= a + 0.05 for a, b in zip(seq, seq[1:]))
    rep.add("mae_x_monotone_decreasing", float(monotone), "within 0.05 mm/s", monotone)
    # near-infinite mass barely moves at all
    (mx, my), _ = _run_mass_case(1e6, seed, duration=5.0)
    rep.add("mae_x_1e6kg_mms", mx, "<= 0.01", mx <= 0.01)

    plt, fig_path = _figure(out_dir, "table2")
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = np.arange(len(masses))
    ax.bar(xs - 0.2, [maes[m][0] for m in masses], 0.4, label="x axis")
    ax.bar(xs + 0.2, [maes[m][1] for m in masses], 0.4, label="y axis")
    ax.set_xticks(xs, [f"{m:g} kg" for m in masses])
    ax.set_ylabel("velocity MAE (mm/s)")
    ax.set_title("desired vs measured velocity across virtual masses")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=130)
    plt.close(fig)
    rep.write_csv(out_dir)
    rep.print_summary()
    return rep


# --- boundary-keeping under sensor noise -------------------------------------------

def _follow_band_case(m: MotionRestrictionMap, path_pts, noise: float, seed: int,
                      duration=25.0, loop=True):
    target = path_target(path_pts, speed=40.0, loop=loop)
    user = PDChase(target=target, kp=0.6, kd=0.03, cap=30.0)
    s = Session(Mode.AAN_HARD, m, noise=noise, seed=seed, start=path_pts[0])
    tr = s.run(duration, user)
    return float(distance_outside(m, tr.positions()).mean()), tr


def exp_table3(out_dir: Path, seed: int = 0,
               noises=(0.0, 3.8, 7.7)) -> ExperimentReport:
    """Hard-boundary assisted mode under injected sensor noise."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = ExperimentReport("table3", dict(seed=seed, noises=list(noises)))
    refs = {("circular", 0.0): "0.067", ("circular", 3.8): "0.061",
            ("circular", 7.7): "0.032", ("hand_drawn", 0.0): "0.134",
            ("hand_drawn", 3.8): "0.115", ("hand_drawn", 7.7): "0.113"}
    circle_pts = [(250.0 * math.cos(a), 250.0 * math.sin(a))
                  for a in np.linspace(0, 2 * math.pi, 181)]
    loop_map, loop_pts = hand_drawn_loop_map(21 + seed)
    cases = [("circular", circle_band_map(), circle_pts),
             ("hand_drawn", loop_map, loop_pts)]
    results = {}
    for name, m, pts in cases:
        for noise in noises:
            mae, _ = _follow_band_case(m, pts, noise, seed)
            results[(name, noise)] = mae
            rep.add(f"mae_{name}_{noise:g}N_mm", mae, "<= 0.3", mae <= 0.3,
                    refs.get((name, noise), ""))
    # the hardware study saw error shrink with noise (speed-coupled); report only
    if 0.0 in noises and 7.7 in noises:
        trend = results[("circular", 7.7)] <= results[("circular", 0.0)] + 0.05
        rep.add("noise_trend_note", float(trend), "", None,
                "error decreases under higher noise on hardware")
    # no motion, no noise: exactly zero error
    s = Session(Mode.AAN_HARD, circle_band_map(), noise=0.0, seed=seed, start=(250.0, 0.0))
    mae0 = float(distance_outside(circle_band_map(), s.run(1.0).positions()).mean())
    rep.add("zero_noise_zero_motion_mae", mae0, "== 0", mae0 == 0.0)

    plt, fig_path = _figure(out_dir, "table3")
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.35
    xs = np.arange(len(noises))
    for off, name in ((-width / 2, "circular"), (width / 2, "hand_drawn")):
        ax.bar(xs + off, [results[(name, n)] for n in noises], width, label=name)
    ax.set_xticks(xs, [f"{n:g} N" for n in noises])
    ax.set_ylabel("MAE (mm)")
    ax.axhline(0.3, color="r", ls="--", lw=0.8, label="threshold")
    ax.set_title("boundary error under injected sensor noise")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=130)
    plt.close(fig)
    rep.write_csv(out_dir)
    rep.print_summary()
    return rep


# --- spring characteristic of the point-attractor zone -------------------------------

def point_attractor_fixture(geom: GridGeometry | None = None, k_sp=0.1, r_k=70):
    """Single permitted cell at the center; force zone radius = 2 r_k cells."""
    geom = geom or default_geometry()
    point = MotionRestrictionMap.empty(geom)
    ccx, ccy = geom.world_to_cell(0.0, 0.0)
    point.cells[ccy, ccx] = 255
    params = ImpedanceParams.for_geometry(geom, k_sp, r_k)
    return point, params, (ccx, ccy)


def exp_fig10(out_dir: Path, seed: int = 0) -> ExperimentReport:
    """Hold-at-radius equilibria against the point-attractor spring field."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k_sp = 0.1
    rep = ExperimentReport("fig10", dict(seed=seed, k_sp=k_sp, zone_mm=140.0))
    point, imp, center = point_attractor_fixture(k_sp=k_sp)
    roam = open_disk_map(230.0)
    adm = AdmittanceParams(virtual_mass=10.0, damping=80.0, friction_coeff=0.0,
                           timestep=1e-3)
    # one shared field build; the hold sessions differ only in start radius
    kernel = ConvolutionKernel(imp.kernel_radius)
    roam_expanded = expand_map(roam, kernel)
    spring = build_spring_map(expand_map(point, kernel), kernel, imp)
    # hold radii across the working span of the zone; the inner fifth is the
    # low-force capture region and the outer ~7% rolls off into the plateau
    radii = np.linspace(28.0, 130.0, 14)
    measured_r = []
    measured_f = []
    for r in radii:
        s = Session(Mode.AAN_SOFT, roam, assist_map=point, impedance=imp,
                    admittance=adm, seed=seed, start=(r, 0.0),
                    expanded=roam_expanded, spring=spring)
        hold = PDChase(target=lambda t, r=r: (r, 0.0), kp=2.0, kd=0.1, cap=100.0)
        n = int(round(3.0 / s.timestep))
        rec = np.empty(12)
        tail_f = []
        tail_r = []
        for k in range(n):
            s.step(hold, record=rec)
            if k >= n - 500:
                tail_f.append(math.hypot(rec[7], rec[8]))
                tail_r.append(math.hypot(rec[1], rec[2]))
        measured_f.append(float(np.mean(tail_f)))
        measured_r.append(float(np.mean(tail_r)))
    slope, intercept, r2 = linear_fit(np.array(measured_r), np.array(measured_f))
    rep.add("spring_slope_N_per_mm", slope, f"{k_sp} +- 5%",
            abs(slope - k_sp) / k_sp <= 0.05, "ideal-spring characteristic")
    rep.add("spring_fit_r2", r2, ">= 0.99", r2 >= 0.99)
    # depth saturates at the zone width beyond the zone edge
    spr = build_spring_map(expand_map(point, ConvolutionKernel(imp.kernel_radius)),
                           ConvolutionKernel(imp.kernel_radius), imp)
    d_out = spr.depth_at(center[0] + 150, center[1])
    rep.add("depth_beyond_zone_mm", d_out, "== 140", d_out == 140.0)
    d_center = spr.depth_at(center[0], center[1])
    rep.add("depth_at_center_mm", d_center, "== 0", d_center == 0.0)

    plt, fig_path = _figure(out_dir, "fig10")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(measured_r, measured_f, label="hold equilibria")
    rr = np.linspace(0, 140, 100)
    ax.plot(rr, slope * rr + intercept, "r--",
            label=f"fit: {slope:.4f} N/mm, R2={r2:.4f}")
    ax.plot(rr, k_sp * rr, "g:", label="ideal spring")
    ax.set_xlabel("distance from center (mm)")
    ax.set_ylabel("holding force (N)")
    ax.set_title("point-attractor spring characteristic")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=130)
    plt.close(fig)
    rep.write_csv(out_dir)
    rep.print_summary()
    return rep


# --- runtime scaling ------------------------------------------------------------------

def _maze_map(geom: GridGeometry) -> MotionRestrictionMap:
    """Permitted corridors in a serpentine pattern, for complexity contrast."""
    m = MotionRestrictionMap.empty(geom)
    cells = m.cells
    cw = max(4, geom.width_cells // 40)
    for row in range(0, geom.height_cells, 4 * cw):
        cells[row:row + cw, :] = 255
    for col in range(0, geom.width_cells, 6 * cw):
        cells[:, col:col + cw] = 255
    m.revision = 0
    return m


def _timed_session_run(geom: GridGeometry, seed: int, steps: int, warmup: int = 1000):
    world_circle = lambda x, y: x ** 2 + y ** 2 - 250.0 ** 2
    band = map_from_implicit(ImplicitCurveSpec(world_circle, 500.0 * geom.resolution), geom)
    imp = ImpedanceParams.for_geometry(geom, 0.1, 6)
    s = Session(Mode.AAN_SOFT, band, impedance=imp, seed=seed, start=(250.0, 0.0))
    target = circle_target((0.0, 0.0), 250.0, 40.0 / 250.0)
    user = PDChase(target=target, kp=0.5, kd=0.02, cap=30.0)
    for _ in range(warmup):
        s.step(user)
    # median over blocks rides out scheduler noise on shared machines
    block = max(1, steps // 10)
    samples = []
    for _ in range(10):
        t0 = time.perf_counter()
        for _ in range(block):
            s.step(user)
        samples.append((time.perf_counter() - t0) / block)
    samples.sort()
    return samples[len(samples) // 2]


def exp_complexity(out_dir: Path, seed: int = 0,
                   sizes=(256, 512, 1024, 2200)) -> ExperimentReport:
    """Per-step cost vs grid discretization, plus constant-cost spot checks."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = ExperimentReport("complexity", dict(seed=seed, sizes=list(sizes),
                                              cpu=platform.processor() or "unknown"))
    times = []
    for n in sizes:
        if n == 2200:
            geom = GridGeometry(2200, 1700, 650.0 / 2200.0,
                                (-325.0, -0.5 * 1699 * 650.0 / 2200.0))
        else:
            res = 650.0 / n
            h = int(round(550.0 / res))
            geom = GridGeometry(n, h, res, (-(n // 2) * res, -(h // 2) * res))
        per_step = _timed_session_run(geom, seed, steps=20_000)
        times.append(per_step)
        rep.add(f"step_us_n{n}", per_step * 1e6,
                "<= 50" if n == 2200 else "", per_step * 1e6 <= 50.0 if n == 2200 else None,
                "10 us on reference hardware" if n == 2200 else "")
    slope, _, _ = linear_fit(np.log(np.array(sizes, float)), np.log(np.array(times)))
    rep.add("loglog_slope", slope, "<= 1.15", slope <= 1.15, "O(n) overall")

    # ring template caching: second call must be much cheaper than the first
    cfg = IevcConfig(lookahead_gain=0.02)
    t0 = time.perf_counter()
    cfg.ring(37)
    first = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(100):
        cfg.ring(37)
    second = (time.perf_counter() - t0) / 100
    rep.add("ring_cache_speedup", first / max(second, 1e-9), ">= 10",
            first / max(second, 1e-9) >= 10.0, "cached constant time")

    # assistance lookup cost must not depend on map complexity
    geom = default_geometry()
    k = ConvolutionKernel(6)
    line = MotionRestrictionMap.empty(geom)
    line.cells[275, :] = 255
    maze = _maze_map(geom)
    timings = {}
    for name, m in (("line", line), ("maze", maze)):
        p = ImpedanceParams.for_geometry(geom, 0.1, 6)
        spr = build_spring_map(expand_map(m, k), k, p)
        # equal work on both maps: sample lookup cells inside the force zone
        zy, zx = np.nonzero((spr.depth > 0) & (spr.depth < p.zone_width))
        pick = np.random.default_rng(seed).integers(0, len(zx), 200)
        cells = [(int(zx[i]), int(zy[i])) for i in pick]
        best = math.inf
        for _ in range(5):  # best-of-5 filters contention spikes
            t0 = time.perf_counter()
            for _ in range(120):
                for c in cells:
                    impedance_step((1.0, 1.0), (10.0, 0.0), c, spr, p)
            best = min(best, time.perf_counter() - t0)
        timings[name] = best
    ratio = timings["maze"] / timings["line"]
    rep.add("assist_lookup_maze_vs_line", ratio, "within +-20%",
            0.8 <= ratio <= 1.2, "constant-time lookup")

    # a heavily edited map costs the same per step as a fresh one
    geom_small = GridGeometry(650, 550, 1.0, (-325.0, -275.0))
    fresh = _timed_session_run(geom_small, seed, steps=8000)
    band = map_from_implicit(
        ImplicitCurveSpec(lambda x, y: x ** 2 + y ** 2 - 250.0 ** 2, 500.0), geom_small)
    from .restriction import CellRect
    for i in range(60):
        edit_region(band, CellRect(5 + i * 3, 5, 7 + i * 3, 8), 255)
    imp = ImpedanceParams.for_geometry(geom_small, 0.1, 6)
    s = Session(Mode.AAN_SOFT, band, impedance=imp, seed=seed, start=(250.0, 0.0))
    user = PDChase(target=circle_target((0.0, 0.0), 250.0, 0.16), kp=0.5, cap=30.0)
    for _ in range(1000):
        s.step(user)
    t0 = time.perf_counter()
    for _ in range(8000):
        s.step(user)
    edited = (time.perf_counter() - t0) / 8000
    ratio_e = edited / fresh
    rep.add("edited_map_step_ratio", ratio_e, "within +-30%",
            0.7 <= ratio_e <= 1.3, "edits add zero steady-state cost")

    plt, fig_path = _figure(out_dir, "complexity")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(sizes, np.array(times) * 1e6, "o-", label="measured")
    ax.loglog(sizes, [times[0] * 1e6 * n / sizes[0] for n in sizes], "--",
              label="linear growth reference")
    ax.axhline(50, color="r", ls=":", label="50 us budget")
    ax.set_xlabel("grid long edge (cells)")
    ax.set_ylabel("mean step cost (us)")
    ax.set_title(f"per-step cost vs discretization (slope {slope:.2f})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(fig_path, dpi=130)
    plt.close(fig)
    rep.write_csv(out_dir)
    rep.print_summary()
    return rep


ALL_EXPERIMENTS = {
    "fig6": exp_fig6,
    "table2": exp_table2,
    "table3": exp_table3,
    "fig10": exp_fig10,
    "complexity": exp_complexity,
}


def run_experiments(names, out_dir, seed: int = 0) -> dict[str, ExperimentReport]:
    out = {}
    for name in names:
        out[name] = ALL_EXPERIMENTS[name](Path(out_dir), seed=seed)
    return out
