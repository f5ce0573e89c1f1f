"""Run configuration: every tunable constant with its default, loadable from YAML."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .baselines import GridConfig, MethodKind, SfmParams
from .env import WorldConfig
from .intent import GeneratorConfig
from .planner import ControllerConfig, PlannerConfig
from .scenarios import KINDS, ScenarioConfig
from .scorer import RolloutConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TriggerConfig:
    t_period: int = 30
    d_risk: float = 3.0
    dt_min: int = 15

    def validate(self) -> None:
        if min(self.t_period, self.d_risk, self.dt_min) <= 0:
            raise ValueError("trigger parameters must be positive")
        if self.dt_min > self.t_period:
            raise ValueError("dt_min must not exceed t_period")


ALL_METHODS = tuple(m.value for m in MethodKind)

# YAML section name -> RunConfig attribute
SECTIONS = {
    "environment": "world",
    "hypothesis_trigger": "trigger",
    "hypothesis_generator": "generator",
    "rollout_scorer": "rollout",
    "motion_planner": "planner",
    "pure_pursuit": "controller",
    "astar": "grid",
    "sfm": "sfm",
    "scenarios": "scenario",
}


@dataclass(frozen=True)
class RunConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    trigger: TriggerConfig = field(default_factory=TriggerConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    rollout: RolloutConfig = field(default_factory=RolloutConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    sfm: SfmParams = field(default_factory=SfmParams)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    methods: tuple[str, ...] = ALL_METHODS
    scenarios: tuple[str, ...] = KINDS
    seeds: tuple[int, ...] = tuple(range(30))
    output_dir: str = "results"
    parallel: int = 1
    alpha: float = 0.05

    def validate(self) -> RunConfig:
        try:
            self.world.validate()
            self.trigger.validate()
            self.rollout.validate()
            self.planner.validate()
            self.controller.validate()
            self.grid.validate(self.world)
            self.sfm.validate()
            self.scenario.validate()
            if self.planner.v_nom > self.world.v_max:
                raise ValueError("nominal speed exceeds v_max")
            if abs(self.planner.pedestrian_radius - self.world.pedestrian_radius) > 1e-12:
                raise ValueError("planner and world disagree on the pedestrian radius")
            for m in self.methods:
                MethodKind.parse(m)
            for s in self.scenarios:
                if s not in KINDS:
                    raise ValueError(f"unknown scenario {s!r}")
            if self.parallel < 1:
                raise ValueError("parallel must be at least 1")
            if not 0 < self.alpha < 1:
                raise ValueError("alpha must lie in (0, 1)")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def parameters(self) -> dict[str, Any]:
        """Simulation parameters only (no run bookkeeping), keyed by YAML section."""
        out = {}
        for section, attr in SECTIONS.items():
            d = dataclasses.asdict(getattr(self, attr))
            if attr == "generator":
                d.pop("api_key", None)
            out[section] = d
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.parameters(), sort_keys=True, separators=(",", ":"), default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kwargs: Any) -> RunConfig:
        return dataclasses.replace(self, **kwargs).validate()


def _build(cls, values: dict[str, Any], section: str):
    known = {f.name for f in dataclasses.fields(cls)}
    values = dict(values)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    for f in dataclasses.fields(cls):
        if f.name in values and isinstance(values[f.name], list):
            values[f.name] = tuple(values[f.name])
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def load_config(path: str | Path | None = None, **overrides: Any) -> RunConfig:
    """Defaults, then the YAML document at ``path``, then keyword overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config document must be a mapping")

    kwargs: dict[str, Any] = {}
    base = RunConfig()
    for section, attr in SECTIONS.items():
        if section in data:
            current = dataclasses.asdict(getattr(base, attr))
            given = dict(data.pop(section) or {})
            if attr == "planner" and "m_bubble" in given:
                # single combined margin, split evenly unless the halves are given
                total = float(given.pop("m_bubble"))
                given.setdefault("m_personal", total / 2)
                given.setdefault("m_group", total / 2)
            current.update(given)
            kwargs[attr] = _build(type(getattr(base, attr)), current, section)
    run = data.pop("run", {}) or {}
    if data:
        raise ConfigError(f"unknown config sections: {sorted(data)}")
    for key, value in run.items():
        if key not in {"methods", "scenarios", "seeds", "output_dir", "parallel", "alpha"}:
            raise ConfigError(f"unknown key in [run]: {key}")
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    kwargs.update(overrides)
    try:
        cfg = RunConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def dump_config(cfg: RunConfig) -> str:
    doc = cfg.parameters()
    doc["run"] = {
        "methods": list(cfg.methods),
        "scenarios": list(cfg.scenarios),
        "seeds": list(cfg.seeds),
        "output_dir": cfg.output_dir,
        "parallel": cfg.parallel,
        "alpha": cfg.alpha,
    }
    return yaml.safe_dump(json.loads(json.dumps(doc, default=list)), sort_keys=False)
