"""Pipeline configuration: YAML on disk, validated with pydantic.

An empty file yields the default two-target scenario, two sensors, the two
trackers (plant noise 1e-3 and 1e-1 m^2/s^3) and the two naval users.
Unknown keys are rejected.
"""
from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from moesonar import assess, sonar_sim
from moesonar.moe_core import DiscreteVector, GaussianExp, RationalHalf, Tabulated, UniformWindow


class ConfigError(ValueError):
    """Configuration could not be parsed or validated."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GaussianExpCfg(_Model):
    kind: Literal["gaussian_exp"] = "gaussian_exp"
    sigma_s: float = Field(gt=0)


class RationalHalfCfg(_Model):
    kind: Literal["rational_half"] = "rational_half"
    a: float = Field(gt=0)


class UniformWindowCfg(_Model):
    kind: Literal["uniform_window"] = "uniform_window"
    lower: float
    upper: float

    @model_validator(mode="after")
    def _order(self):
        if not self.lower < self.upper:
            raise ValueError("lower must be < upper")
        return self


class TabulatedCfg(_Model):
    kind: Literal["tabulated"] = "tabulated"
    knots: list[tuple[float, float]] = Field(min_length=1)


UserFunctionCfg = Annotated[
    Union[GaussianExpCfg, RationalHalfCfg, UniformWindowCfg, TabulatedCfg], Field(discriminator="kind")
]


def _uf(cfg):
    if isinstance(cfg, GaussianExpCfg):
        return GaussianExp(cfg.sigma_s)
    if isinstance(cfg, RationalHalfCfg):
        return RationalHalf(cfg.a)
    if isinstance(cfg, UniformWindowCfg):
        return UniformWindow(cfg.lower, cfg.upper)
    return Tabulated(tuple(cfg.knots))


class UserCfg(_Model):
    user_id: str
    position: UserFunctionCfg
    speed: UserFunctionCfg
    heading: UserFunctionCfg
    identity: dict[Literal["E", "N", "F"], tuple[float, float, float]]

    @field_validator("identity")
    @classmethod
    def _unit_interval(cls, v):
        for lab, vec in v.items():
            if any(not 0.0 <= x <= 1.0 for x in vec):
                raise ValueError(f"identity vector for {lab} must have entries in [0, 1]")
        return v

    def to_domain(self) -> assess.UserSpec:
        return assess.UserSpec(
            self.user_id, _uf(self.position), _uf(self.speed), _uf(self.heading),
            {lab: DiscreteVector(sonar_sim.ALLEGIANCES, vec) for lab, vec in self.identity.items()},
        )


class LegCfg(_Model):
    duration: float = Field(gt=0)
    speed: float = Field(ge=0)
    heading: float


class TargetCfg(_Model):
    target_id: int
    allegiance: Literal["E", "N", "F"]
    start: tuple[float, float]
    legs: list[LegCfg] = Field(min_length=1)


class ScenarioCfg(_Model):
    dt: float = Field(default=10.0, gt=0)
    start_jitter: float = Field(default=0.0, ge=0)
    targets: list[TargetCfg] = Field(min_length=1)

    def to_domain(self) -> sonar_sim.ScenarioConfig:
        return sonar_sim.ScenarioConfig(
            tuple(sonar_sim.TargetConfig(t.target_id, t.allegiance, tuple(t.start),
                                         tuple(sonar_sim.Leg(l.duration, l.speed, l.heading) for l in t.legs))
                  for t in self.targets),
            self.dt, self.start_jitter)


class SensorCfg(_Model):
    sensor_id: int
    pos: tuple[float, float]
    bearing_sigma: float = Field(gt=0)
    detection_prob: float = Field(default=1.0, ge=0, le=1)
    identity_concentration: float = Field(default=20.0, gt=0)

    def to_domain(self) -> sonar_sim.SensorSpec:
        return sonar_sim.SensorSpec(self.sensor_id, tuple(self.pos), self.bearing_sigma,
                                    self.detection_prob, self.identity_concentration)


class TrackerCfg(_Model):
    name: str
    q: float = Field(gt=0)
    initial_velocity_sigma: float = Field(default=10.0, gt=0)

    def to_domain(self) -> sonar_sim.TrackerConfig:
        return sonar_sim.TrackerConfig(self.name, self.q, self.initial_velocity_sigma)


class MonteCarloCfg(_Model):
    n_runs: int = Field(default=20, ge=1)
    base_seed: int = 0


class SignificanceCfg(_Model):
    confidence: float = Field(default=0.95, gt=0, lt=1)
    tracker_a: str | None = None
    tracker_b: str | None = None
    user_mode: Literal["arithmetic", "geometric"] = "geometric"


def _default_scenario() -> ScenarioCfg:
    sc = sonar_sim.default_scenario()
    return ScenarioCfg(dt=sc.dt, start_jitter=sc.start_jitter, targets=[
        TargetCfg(target_id=t.target_id, allegiance=t.allegiance, start=t.start,
                  legs=[LegCfg(duration=l.duration, speed=l.speed, heading=l.heading) for l in t.legs])
        for t in sc.targets])


def _default_sensors() -> list[SensorCfg]:
    return [SensorCfg(sensor_id=s.sensor_id, pos=s.pos, bearing_sigma=s.bearing_sigma,
                      detection_prob=s.detection_prob, identity_concentration=s.identity_concentration)
            for s in sonar_sim.default_sensors()]


def _default_trackers() -> list[TrackerCfg]:
    return [TrackerCfg(name=t.name, q=t.q, initial_velocity_sigma=t.initial_velocity_sigma)
            for t in sonar_sim.default_trackers()]


def _default_users() -> list[UserCfg]:
    return [
        UserCfg(user_id="user1", position=GaussianExpCfg(sigma_s=0.5), speed=GaussianExpCfg(sigma_s=2.0),
                heading=GaussianExpCfg(sigma_s=5.0), identity={"F": (0.2, 0.2, 0.6), "E": (0.6, 0.2, 0.2)}),
        UserCfg(user_id="user2", position=RationalHalfCfg(a=0.2), speed=RationalHalfCfg(a=1.0),
                heading=RationalHalfCfg(a=2.0), identity={"F": (0.0, 0.0, 1.0), "E": (1.0, 0.0, 0.0)}),
    ]


class PipelineConfig(_Model):
    scenario: ScenarioCfg = Field(default_factory=_default_scenario)
    sensors: list[SensorCfg] = Field(default_factory=_default_sensors, min_length=2, max_length=2)
    trackers: list[TrackerCfg] = Field(default_factory=_default_trackers, min_length=1)
    users: list[UserCfg] = Field(default_factory=_default_users, min_length=1)
    monte_carlo: MonteCarloCfg = Field(default_factory=MonteCarloCfg)
    significance: SignificanceCfg = Field(default_factory=SignificanceCfg)

    @model_validator(mode="after")
    def _names_resolve(self):
        names = [t.name for t in self.trackers]
        if len(set(names)) != len(names):
            raise ValueError("tracker names must be unique")
        if len({s.sensor_id for s in self.sensors}) != len(self.sensors):
            raise ValueError("sensor ids must be unique")
        if len({u.user_id for u in self.users}) != len(self.users):
            raise ValueError("user ids must be unique")
        if len({t.target_id for t in self.scenario.targets}) != len(self.scenario.targets):
            raise ValueError("target ids must be unique")
        for ref in (self.significance.tracker_a, self.significance.tracker_b):
            if ref is not None and ref not in names:
                raise ValueError(f"significance tracker {ref!r} is not a configured tracker")
        allegiances = {t.allegiance for t in self.scenario.targets}
        for u in self.users:
            missing = allegiances - set(u.identity)
            if missing:
                raise ValueError(f"user {u.user_id} lacks identity vectors for {sorted(missing)}")
        return self

    def compared_trackers(self) -> tuple[str, str]:
        names = [t.name for t in self.trackers]
        a = self.significance.tracker_a or names[0]
        b = self.significance.tracker_b or (names[1] if len(names) > 1 else names[0])
        return a, b

    def domain(self):
        """``(scenario, sensors, trackers, users)`` as simulation objects."""
        return (self.scenario.to_domain(), tuple(s.to_domain() for s in self.sensors),
                tuple(t.to_domain() for t in self.trackers), tuple(u.to_domain() for u in self.users))


def _format_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(text: str, source: str = "<string>") -> PipelineConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark is not None else ""
        raise ConfigError(f"{source}: parse error{where}: {getattr(exc, 'problem', exc)}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid config: {_format_validation(exc)}") from None


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def dump_config(cfg: PipelineConfig) -> str:
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg))
