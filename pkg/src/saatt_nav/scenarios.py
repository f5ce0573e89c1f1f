"""Seeded layouts for the three scenario families and the paired trial plan."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .core import Vec2, segment_point_distance, segments_intersect
from .env import PedestrianScript, PedestrianState, WorldConfig
from .planner import PlannerConfig, bubble_radius

KINDS = ("A", "B", "C")
MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class ScenarioConfig:
    prng: str = "PCG64"
    wall_clearance: float = 1.0
    route_length: tuple[float, float] = (6.0, 8.0)
    route_center_jitter: float = 1.0
    # Scenario B: surface-to-surface gap between the conversing pair.
    pair_gap: tuple[float, float] = (0.8, 1.5)
    pair_along_offset: float = 0.8
    pair_lateral_offset: float = 0.3
    pair_axis_jitter: float = math.radians(15.0)
    endpoint_bubble_clearance: float = 1.0
    # Scenario C
    crossing_speed: tuple[float, float] = (0.4, 0.8)
    crossing_fraction: tuple[float, float] = (0.35, 0.6)
    crossing_timing_jitter: float = 0.6
    crossing_min_offset: float = 1.0

    def validate(self) -> None:
        if self.prng != "PCG64":
            raise ValueError(f"unsupported PRNG {self.prng!r}; only PCG64 is pinned")
        if self.wall_clearance < 0.5:
            raise ValueError("start/goal need at least 0.5 m wall clearance")
        if self.route_length[0] < 5.0 or self.route_length[0] > self.route_length[1]:
            raise ValueError("route length range must start at 5 m or more")
        if math.hypot(self.pair_along_offset, self.pair_lateral_offset) > 1.0:
            raise ValueError("pair midpoint must stay within 1 m of the route midpoint")


@dataclass(frozen=True)
class Layout:
    kind: str
    seed: int
    start: Vec2
    goal: Vec2
    pedestrians: tuple[PedestrianState, ...] = field(default_factory=tuple)

    @property
    def initial_heading(self) -> float:
        d = self.goal - self.start
        return math.atan2(d.y, d.x)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "start": [self.start.x, self.start.y],
            "goal": [self.goal.x, self.goal.y],
            "pedestrians": [
                {
                    "id": p.id,
                    "position": [p.position.x, p.position.y],
                    "velocity": [p.velocity.x, p.velocity.y],
                    "radius": p.radius,
                    "script": {"kind": p.script.kind, "speed": p.script.speed, "facing": p.script.facing},
                }
                for p in self.pedestrians
            ],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Layout:
        peds = tuple(
            PedestrianState(
                id=int(p["id"]),
                position=Vec2(*p["position"]),
                velocity=Vec2(*p["velocity"]),
                radius=float(p["radius"]),
                script=PedestrianScript(**p["script"]),
            )
            for p in d["pedestrians"]
        )
        return cls(d["kind"], int(d["seed"]), Vec2(*d["start"]), Vec2(*d["goal"]), peds)


def _rng(kind: str, seed: int) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    tag = int.from_bytes(hashlib.sha256(f"saatt-layout/{kind}".encode()).digest()[:8], "little")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tag])))


class _Draw:
    """Uniform draws from ``Generator.random`` only, whose bit stream numpy keeps stable."""

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * float(self.rng.random())

    def sign(self) -> float:
        return 1.0 if self.rng.random() < 0.5 else -1.0


def _inside(p: Vec2, world: WorldConfig, margin: float) -> bool:
    return margin <= p.x <= world.arena_width - margin and margin <= p.y <= world.arena_height - margin


def _route(draw: _Draw, cfg: ScenarioConfig, world: WorldConfig) -> tuple[Vec2, Vec2] | None:
    rad = cfg.route_center_jitter * math.sqrt(draw.uniform(0.0, 1.0))
    phi = draw.uniform(0.0, 2.0 * math.pi)
    mid = Vec2(world.arena_width / 2, world.arena_height / 2) + Vec2(math.cos(phi), math.sin(phi)) * rad
    ang = draw.uniform(0.0, 2.0 * math.pi)
    length = draw.uniform(*cfg.route_length)
    d = Vec2(math.cos(ang), math.sin(ang)) * (length / 2)
    start, goal = mid - d, mid + d
    if _inside(start, world, cfg.wall_clearance) and _inside(goal, world, cfg.wall_clearance):
        return start, goal
    return None


def nominal_travel_time(distance: float, v_nom: float = 1.5, k_v: float = 1.0, a_max: float = 2.0) -> float:
    """Time to cover ``distance`` from rest under a = min(k_v (v_nom - v), a_max), continuous time."""

    def covered(t: float) -> float:
        # a_max only binds when k_v * v_nom > a_max; handle the saturated ramp first.
        t_sat = max(0.0, (k_v * v_nom - a_max) / (k_v * a_max)) if k_v * v_nom > a_max else 0.0
        if t <= t_sat:
            return 0.5 * a_max * t * t
        v0 = a_max * t_sat
        s0 = 0.5 * a_max * t_sat * t_sat
        tau = t - t_sat
        return s0 + v_nom * tau - (v_nom - v0) / k_v * (1.0 - math.exp(-k_v * tau))

    lo, hi = 0.0, 1.0
    while covered(hi) < distance:
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if covered(mid) < distance:
            lo = mid
        else:
            hi = mid
    return hi


def _layout_b(draw: _Draw, start: Vec2, goal: Vec2, cfg: ScenarioConfig, world: WorldConfig,
              planner: PlannerConfig) -> tuple[PedestrianState, ...] | None:
    route = goal - start
    d = route.unit()
    n = d.perp()
    mid = (start + goal) * 0.5
    center = mid + d * draw.uniform(-cfg.pair_along_offset, cfg.pair_along_offset) \
        + n * draw.uniform(-cfg.pair_lateral_offset, cfg.pair_lateral_offset)
    gap = draw.uniform(*cfg.pair_gap)
    half = 0.5 * gap + world.pedestrian_radius
    axis = n.rotate(draw.uniform(-cfg.pair_axis_jitter, cfg.pair_axis_jitter))
    p1, p2 = center - axis * half, center + axis * half
    facing = math.atan2(axis.y, axis.x)
    r_b = bubble_radius(p1, p2, planner)

    if segment_point_distance(start, goal, center) >= r_b:
        return None
    if min(start.dist(center), goal.dist(center)) < r_b + cfg.endpoint_bubble_clearance:
        return None
    reach = r_b + planner.detour_clearance + world.wheelchair_radius + 0.1
    if not (_inside(center + n * reach, world, 0.0) and _inside(center - n * reach, world, 0.0)):
        return None
    return (
        PedestrianState(0, p1, Vec2(0.0, 0.0), world.pedestrian_radius, PedestrianScript("stationary", 0.0, facing)),
        PedestrianState(1, p2, Vec2(0.0, 0.0), world.pedestrian_radius,
                        PedestrianScript("stationary", 0.0, math.atan2(-axis.y, -axis.x))),
    )


def _layout_c(draw: _Draw, start: Vec2, goal: Vec2, cfg: ScenarioConfig, world: WorldConfig,
              planner: PlannerConfig) -> tuple[PedestrianState, ...] | None:
    route = goal - start
    d = route.unit()
    n = d.perp()
    frac = draw.uniform(*cfg.crossing_fraction)
    speed = draw.uniform(*cfg.crossing_speed)
    side = draw.sign()
    jitter = draw.uniform(-cfg.crossing_timing_jitter, cfg.crossing_timing_jitter)
    crossing = start + route * frac
    # Spawn so the pedestrian reaches the route about when the wheelchair would.
    arrival = nominal_travel_time(route.norm() * frac, planner.v_nom)
    offset = max(cfg.crossing_min_offset, speed * (arrival + jitter))
    pos = crossing + n * (side * offset)
    vel = n * (-side * speed)
    if not _inside(pos, world, world.pedestrian_radius):
        return None
    far = pos + vel * (2.0 * offset / speed)
    if not segments_intersect(pos, far, start, goal):
        return None
    return (PedestrianState(0, pos, vel, world.pedestrian_radius, PedestrianScript("crossing", speed, 0.0)),)


def generate(
    kind: str,
    seed: int,
    config: ScenarioConfig = ScenarioConfig(),
    world: WorldConfig = WorldConfig(),
    planner: PlannerConfig = PlannerConfig(),
) -> Layout:
    """Deterministic layout for (kind, seed); rejected draws retry on the same substream."""
    if kind not in KINDS:
        raise ValueError(f"unknown scenario kind {kind!r}")
    draw = _Draw(_rng(kind, seed))
    for _ in range(MAX_ATTEMPTS):
        route = _route(draw, config, world)
        if route is None:
            continue
        start, goal = route
        if kind == "A":
            return Layout(kind, seed, start, goal, ())
        build = _layout_b if kind == "B" else _layout_c
        peds = build(draw, start, goal, config, world, planner)
        if peds is not None:
            return Layout(kind, seed, start, goal, peds)
    raise RuntimeError(f"no valid {kind} layout for seed {seed} within {MAX_ATTEMPTS} attempts")


@dataclass(frozen=True, order=True)
class TrialSpec:
    kind: str
    method: str
    seed: int


def batch(seeds: Iterable[int], kinds: Sequence[str] = KINDS, methods: Sequence[str] = ()) -> list[TrialSpec]:
    """Full cross product; every (kind, seed) layout is shared by all methods."""
    seeds = list(seeds)
    return [TrialSpec(k, m, s) for k in kinds for m in methods for s in seeds]
