"""Two-target, two-sensor passive sonar test-bed.

Data flow: scenario truth -> per-sensor bearing/identity reports ->
triangulated plots with covariance and fused identity -> constant-velocity
Kalman tracks, one per target label (association is by the label carried
through from the truth, so it is always correct).

Bearings and headings are compass degrees, clockwise from North; positions
are metres east (x) and north (y).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from moesonar import kernels

ALLEGIANCES = ("E", "N", "F")
PARALLEL_SIN_LIMIT = 1e-3
SIMPLEX_TOL = 1e-9


class SimulationError(ValueError):
    """Malformed scenario, sensor or tracker input."""


def _rng(seed: int, *stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *stream]))


def compass_to_unit(bearing_deg):
    """Unit vector (east, north) for a compass bearing in degrees."""
    b = np.radians(bearing_deg)
    return np.sin(b), np.cos(b)


def compass_bearing(dx, dy):
    """Compass bearing in degrees ``[0, 360)`` of the vector (dx, dy)."""
    return np.mod(np.degrees(np.arctan2(dx, dy)), 360.0)


def wrap_degrees(angle):
    """Wrap an angle difference into ``[-180, 180)``."""
    return np.mod(np.asarray(angle, dtype=float) + 180.0, 360.0) - 180.0


def _check_simplex(v: Sequence[float], what: str) -> tuple[float, float, float]:
    v = tuple(float(x) for x in v)
    if len(v) != 3 or any(x < 0 or not math.isfinite(x) for x in v) or abs(math.fsum(v) - 1.0) > SIMPLEX_TOL:
        raise SimulationError(f"{what} is not a probability 3-vector: {v}")
    return v


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruthRecord:
    t: float
    target_id: int
    pos: tuple[float, float]
    speed: float
    heading: float
    allegiance: str

    def __post_init__(self) -> None:
        if self.allegiance not in ALLEGIANCES:
            raise SimulationError(f"unknown allegiance {self.allegiance!r}")
        if self.speed < 0:
            raise SimulationError("speed must be non-negative")
        if not 0.0 <= self.heading < 360.0:
            raise SimulationError(f"heading {self.heading} outside [0, 360)")


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: int
    pos: tuple[float, float]
    bearing_sigma: float
    detection_prob: float = 1.0
    identity_concentration: float = 20.0

    def __post_init__(self) -> None:
        if not (self.bearing_sigma > 0 and math.isfinite(self.bearing_sigma)):
            raise SimulationError("bearing_sigma must be positive")
        if not 0.0 <= self.detection_prob <= 1.0:
            raise SimulationError("detection_prob must lie in [0, 1]")
        if not self.identity_concentration > 0:
            raise SimulationError("identity_concentration must be positive")


@dataclass(frozen=True)
class SensorReport:
    t: float
    sensor_id: int
    target_label: int
    bearing: float
    identity: tuple[float, float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "identity", _check_simplex(self.identity, "report identity"))


@dataclass(frozen=True)
class Plot:
    t: float
    target_label: int
    pos_est: tuple[float, float]
    cov: np.ndarray = field(compare=False)
    identity: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self) -> None:
        cov = np.asarray(self.cov, dtype=float).reshape(2, 2)
        if abs(cov[0, 1] - cov[1, 0]) > 1e-9 * max(1.0, abs(cov).max()):
            raise SimulationError("plot covariance is not symmetric")
        if cov[0, 0] < 0 or cov[1, 1] < 0 or cov[0, 1] ** 2 > cov[0, 0] * cov[1, 1] * (1 + 1e-12):
            raise SimulationError("plot covariance is not positive semi-definite")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "identity", _check_simplex(self.identity, "plot identity"))


@dataclass(frozen=True)
class TrackState:
    t: float
    state: np.ndarray = field(compare=False)
    cov: np.ndarray = field(compare=False)
    identity: tuple[float, float, float]
    nis: float = float("nan")


@dataclass(frozen=True)
class Track:
    track_id: int
    target_label: int
    states: tuple[TrackState, ...]


@dataclass(frozen=True)
class TrackerConfig:
    name: str
    q: float
    initial_velocity_sigma: float = 10.0

    def __post_init__(self) -> None:
        if not (self.q > 0 and math.isfinite(self.q)):
            raise SimulationError("tracker q must be positive")
        if not self.initial_velocity_sigma > 0:
            raise SimulationError("initial_velocity_sigma must be positive")


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Leg:
    duration: float
    speed: float
    heading: float


@dataclass(frozen=True)
class TargetConfig:
    target_id: int
    allegiance: str
    start: tuple[float, float]
    legs: tuple[Leg, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    targets: tuple[TargetConfig, ...]
    dt: float = 10.0
    start_jitter: float = 0.0


def default_scenario() -> ScenarioConfig:
    return ScenarioConfig(
        targets=(
            TargetConfig(1, "F", (-6000.0, 10000.0), (Leg(400.0, 5.0, 90.0), Leg(400.0, 5.0, 80.0))),
            TargetConfig(2, "E", (-2000.0, 15000.0), (Leg(800.0, 4.0, 90.0),)),
        ),
        dt=10.0,
    )


def default_sensors() -> tuple[SensorSpec, SensorSpec]:
    return (
        SensorSpec(1, (-10000.0, 0.0), bearing_sigma=0.003, detection_prob=0.9, identity_concentration=20.0),
        SensorSpec(2, (10000.0, 0.0), bearing_sigma=0.003, detection_prob=0.9, identity_concentration=20.0),
    )


def default_trackers() -> tuple[TrackerConfig, TrackerConfig]:
    return (TrackerConfig("tracker1", 1e-3), TrackerConfig("tracker2", 1e-1))


def generate_scenario(config: ScenarioConfig, seed: int = 0) -> list[TruthRecord]:
    """Sample piecewise-constant-velocity truth every ``dt`` seconds.

    ``start_jitter`` (metres, 1-sigma) perturbs each start position using
    ``seed``; with the default of zero the truth is seed-independent.
    """
    if not config.targets:
        raise SimulationError("scenario needs at least one target")
    if not config.dt > 0:
        raise SimulationError("dt must be positive")
    rng = _rng(seed, 0)
    out: list[TruthRecord] = []
    for tgt in config.targets:
        if tgt.allegiance not in ALLEGIANCES:
            raise SimulationError(f"target {tgt.target_id}: unknown allegiance {tgt.allegiance!r}")
        if not tgt.legs:
            raise SimulationError(f"target {tgt.target_id}: no legs")
        for leg in tgt.legs:
            if not (leg.duration > 0 and math.isfinite(leg.speed) and leg.speed >= 0
                    and math.isfinite(leg.heading)):
                raise SimulationError(f"target {tgt.target_id}: malformed leg {leg}")
        jitter = rng.normal(0.0, config.start_jitter, 2) if config.start_jitter > 0 else np.zeros(2)
        x0, y0 = tgt.start[0] + jitter[0], tgt.start[1] + jitter[1]
        ends = np.cumsum([leg.duration for leg in tgt.legs])
        total = float(ends[-1])
        n = int(math.floor(total / config.dt + 1e-9))
        # leg start positions
        starts = [(x0, y0)]
        for leg in tgt.legs:
            ex, ey = compass_to_unit(leg.heading)
            px, py = starts[-1]
            starts.append((px + leg.speed * leg.duration * ex, py + leg.speed * leg.duration * ey))
        for i in range(n + 1):
            t = i * config.dt
            j = min(int(np.searchsorted(ends, t, side="right")), len(tgt.legs) - 1)
            leg = tgt.legs[j]
            t0 = float(ends[j - 1]) if j > 0 else 0.0
            ex, ey = compass_to_unit(leg.heading)
            px, py = starts[j]
            pos = (float(px + leg.speed * (t - t0) * ex), float(py + leg.speed * (t - t0) * ey))
            out.append(TruthRecord(t, tgt.target_id, pos, float(leg.speed),
                                   float(leg.heading % 360.0), tgt.allegiance))
    return out


# ---------------------------------------------------------------------------
# Sensors and plots
# ---------------------------------------------------------------------------


def identity_base(allegiance: str) -> np.ndarray:
    return np.array([0.8 if a == allegiance else 0.1 for a in ALLEGIANCES])


def simulate_sensor(truth: Sequence[TruthRecord], spec: SensorSpec, seed: int = 0) -> list[SensorReport]:
    """Bearing and identity reports from one stationary passive sensor.

    Detection, bearing noise and identity draws use independent generators
    derived from ``(seed, sensor_id)`` so a sensor's reports do not depend on
    the other sensor's settings.
    """
    det_rng = _rng(seed, 1, spec.sensor_id)
    brg_rng = _rng(seed, 2, spec.sensor_id)
    id_rng = _rng(seed, 3, spec.sensor_id)
    out: list[SensorReport] = []
    for rec in sorted(truth, key=lambda r: (r.t, r.target_id)):
        detected = det_rng.random() < spec.detection_prob
        noise = brg_rng.normal(0.0, spec.bearing_sigma)
        ident = id_rng.dirichlet(spec.identity_concentration * identity_base(rec.allegiance))
        if not detected:
            continue
        true_b = float(compass_bearing(rec.pos[0] - spec.pos[0], rec.pos[1] - spec.pos[1]))
        ident = ident / ident.sum()
        out.append(SensorReport(rec.t, spec.sensor_id, rec.target_id,
                                float((true_b + noise) % 360.0), tuple(float(v) for v in ident)))
    return out


def intersect_bearings(p1, p2, b1_deg, b2_deg):
    """Intersection of bearing rays from ``p1`` and ``p2`` (vectorised).

    Returns ``(x, y, range1, range2, sin_cross)``; ranges are distances along
    each ray and are negative when the intersection lies behind a sensor.
    """
    e1, n1 = compass_to_unit(b1_deg)
    e2, n2 = compass_to_unit(b2_deg)
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    c = e1 * n2 - n1 * e2
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = (dx * n2 - dy * e2) / c
        r2 = (dx * n1 - dy * e1) / c
    return p1[0] + r1 * e1, p1[1] + r1 * n1, r1, r2, c


def intersection_jacobian(p1, p2, b1_deg, b2_deg) -> np.ndarray:
    """d(x, y) / d(bearing1, bearing2), bearings in radians."""
    t1, t2 = math.radians(b1_deg), math.radians(b2_deg)
    s1, c1, s2, c2 = math.sin(t1), math.cos(t1), math.sin(t2), math.cos(t2)
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    cr = s1 * c2 - c1 * s2  # sin(t1 - t2)
    num = dx * c2 - dy * s2
    r1 = num / cr
    # d/dt1: numerator fixed, cross term derivative = cos(t1 - t2)
    dcr1 = c1 * c2 + s1 * s2
    dr1_dt1 = -num * dcr1 / cr ** 2
    dxy_dt1 = (dr1_dt1 * s1 + r1 * c1, dr1_dt1 * c1 - r1 * s1)
    dnum2 = -dx * s2 - dy * c2
    dcr2 = -(s1 * s2 + c1 * c2)
    dr1_dt2 = (dnum2 * cr - num * dcr2) / cr ** 2
    dxy_dt2 = (dr1_dt2 * s1, dr1_dt2 * c1)
    return np.array([[dxy_dt1[0], dxy_dt2[0]], [dxy_dt1[1], dxy_dt2[1]]])


def fuse_identity(v1: Sequence[float], v2: Sequence[float]) -> tuple[float, float, float]:
    """Conservative fusion: element-wise arithmetic mean."""
    a = _check_simplex(v1, "identity v1")
    b = _check_simplex(v2, "identity v2")
    return tuple(0.5 * (x + y) for x, y in zip(a, b))


def triangulate(r1: SensorReport, r2: SensorReport, s1: SensorSpec, s2: SensorSpec) -> Plot | None:
    """Plot from two synchronous bearings on the same target.

    Returns ``None`` for unusable geometry: near-parallel rays
    (``|sin crossing angle| < 1e-3``) or an intersection behind a sensor.
    """
    if r1.t != r2.t or r1.target_label != r2.target_label:
        raise SimulationError("triangulation needs reports at the same time on the same target")
    if r1.sensor_id != s1.sensor_id or r2.sensor_id != s2.sensor_id:
        raise SimulationError("report/sensor mismatch")
    x, y, rg1, rg2, c = intersect_bearings(s1.pos, s2.pos, r1.bearing, r2.bearing)
    if abs(c) < PARALLEL_SIN_LIMIT or not (rg1 > 0 and rg2 > 0):
        return None
    J = intersection_jacobian(s1.pos, s2.pos, r1.bearing, r2.bearing)
    D = np.diag([math.radians(s1.bearing_sigma) ** 2, math.radians(s2.bearing_sigma) ** 2])
    cov = J @ D @ J.T
    cov = 0.5 * (cov + cov.T)
    return Plot(r1.t, r1.target_label, (float(x), float(y)), cov, fuse_identity(r1.identity, r2.identity))


def make_plots(reports1: Iterable[SensorReport], reports2: Iterable[SensorReport],
               s1: SensorSpec, s2: SensorSpec) -> list[Plot]:
    """Triangulate every (time, target) seen by both sensors."""
    second = {(r.t, r.target_label): r for r in reports2}
    plots = []
    for r in sorted(reports1, key=lambda r: (r.t, r.target_label)):
        other = second.get((r.t, r.target_label))
        if other is None:
            continue
        p = triangulate(r, other, s1, s2)
        if p is not None:
            plots.append(p)
    return plots


# ---------------------------------------------------------------------------
# Tracking
# ---------------------------------------------------------------------------


def run_tracker(plots: Sequence[Plot], cfg: TrackerConfig, track_id: int | None = None) -> Track:
    """Constant-velocity Kalman filter over one target's plots.

    State ``[x, y, vx, vy]``; process noise is continuous white-noise
    acceleration with spectral density ``q``; the measurement covariance is
    each plot's triangulation covariance.
    """
    if not plots:
        raise SimulationError("run_tracker needs at least one plot")
    labels = {p.target_label for p in plots}
    if len(labels) != 1:
        raise SimulationError(f"plots from several targets {sorted(labels)} passed to one tracker")
    times = np.array([p.t for p in plots], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise SimulationError("plots must be strictly time-ordered")
    z = np.array([p.pos_est for p in plots], dtype=float)
    r = np.array([(p.cov[0, 0], p.cov[0, 1], p.cov[1, 1]) for p in plots], dtype=float)
    states, covs, nis = kernels.kalman_cv(times, z, r, float(cfg.q), float(cfg.initial_velocity_sigma) ** 2)
    label = plots[0].target_label
    return Track(
        track_id if track_id is not None else label,
        label,
        tuple(TrackState(float(times[k]), states[k].copy(), covs[k].copy(), plots[k].identity, float(nis[k]))
              for k in range(len(plots))),
    )


def track_all(plots: Sequence[Plot], cfg: TrackerConfig) -> list[Track]:
    by_label: dict[int, list[Plot]] = {}
    for p in plots:
        by_label.setdefault(p.target_label, []).append(p)
    return [run_tracker(sorted(by_label[lab], key=lambda p: p.t), cfg) for lab in sorted(by_label)]


@dataclass(frozen=True)
class Kinematics:
    pos: tuple[float, float]
    speed: float
    heading: float
    heading_defined: bool


def kinematics(state: Sequence[float]) -> Kinematics:
    x, y, vx, vy = (float(v) for v in state)
    speed = math.hypot(vx, vy)
    if speed < 1e-9:
        return Kinematics((x, y), speed, float("nan"), False)
    return Kinematics((x, y), speed, float(compass_bearing(vx, vy)), True)


# ---------------------------------------------------------------------------
# One full run
# ---------------------------------------------------------------------------


@dataclass
class SimulationRun:
    seed: int
    truth: list[TruthRecord]
    reports: dict[int, list[SensorReport]]
    plots: list[Plot]
    tracks: dict[str, list[Track]]


def simulate_run(scenario: ScenarioConfig, sensors: Sequence[SensorSpec],
                 trackers: Sequence[TrackerConfig], seed: int) -> SimulationRun:
    if len(sensors) != 2:
        raise SimulationError("the test-bed uses exactly two sensors")
    truth = generate_scenario(scenario, seed)
    reports = {s.sensor_id: simulate_sensor(truth, s, seed) for s in sensors}
    plots = make_plots(reports[sensors[0].sensor_id], reports[sensors[1].sensor_id], sensors[0], sensors[1])
    tracks = {cfg.name: track_all(plots, cfg) for cfg in trackers}
    return SimulationRun(seed, truth, reports, plots, tracks)
