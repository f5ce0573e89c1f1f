"""Rule-based motion planner (intent speed gates, rush side-step, group detour) and pure pursuit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Vec2, clip, segment_point_distance, wrap_angle
from .env import ControlCommand, Observation, PedestrianState, WheelchairState
from .intent import Hypothesis, Intent

__all__ = [
    "ControlCommand",
    "ControllerConfig",
    "PlannerConfig",
    "SocialBubble",
    "bubble_radius",
    "detect_group",
    "detour_waypoint",
    "gated_speed",
    "plan",
    "pure_pursuit",
    "pure_pursuit_raw",
    "reference_speed",
]


@dataclass(frozen=True)
class ControllerConfig:
    k_theta: float = 2.0
    k_v: float = 1.0
    omega_max: float = 1.0
    a_min: float = -2.0
    a_max: float = 2.0

    def validate(self) -> None:
        if self.omega_max <= 0 or self.a_min > 0 or self.a_max < 0 or self.a_min >= self.a_max:
            raise ValueError("invalid actuator bounds")
        if self.k_theta <= 0 or self.k_v <= 0:
            raise ValueError("controller gains must be positive")


@dataclass(frozen=True)
class PlannerConfig:
    v_nom: float = 1.5
    # Base proximity gates; also the rush thresholds and the only gates left in the ablation.
    d_slow: float = 1.0
    d_stop: float = 0.6
    v_slow: float = 0.5
    yield_d_slow: float = 1.5
    yield_d_stop: float = 0.9
    yield_v_slow: float = 0.3
    group_speed_threshold: float = 0.05
    # Measured between body edges (centre distance minus two pedestrian radii).
    group_gap_threshold: float = 2.0
    pedestrian_radius: float = 0.3
    m_personal: float = 0.15
    m_group: float = 0.15
    detour_clearance: float = 0.2
    detour_min_arc: float = math.radians(30.0)
    lateral_offset: float = 0.8
    lateral_lookahead: float = 1.0
    # "behind": pass behind a crossing pedestrian; "side": away from its current side.
    lateral_rule: str = "behind"
    # "center": gates compare centre distance; "clearance": distance between body edges.
    gate_distance: str = "clearance"

    def thresholds(self, intent: Intent | None) -> tuple[float, float, float]:
        """(d_stop, d_slow, v_slow) for an intent; ``None`` selects the base gates."""
        if intent is Intent.YIELD:
            return self.yield_d_stop, self.yield_d_slow, self.yield_v_slow
        return self.d_stop, self.d_slow, self.v_slow

    def validate(self) -> None:
        for name in ("v_nom", "d_slow", "d_stop", "yield_d_slow", "yield_d_stop",
                     "pedestrian_radius", "m_personal", "m_group", "detour_clearance",
                     "group_gap_threshold", "lateral_offset", "lateral_lookahead"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (self.d_stop < self.d_slow and self.yield_d_stop < self.yield_d_slow):
            raise ValueError("stop radius must be smaller than slow-down radius")
        if not (self.yield_d_slow > self.d_slow and self.yield_d_stop > self.d_stop):
            raise ValueError("yield thresholds must exceed rush thresholds")
        if not (0 <= self.v_slow <= self.v_nom and 0 <= self.yield_v_slow <= self.v_nom):
            raise ValueError("slow speeds must lie in [0, v_nom]")
        if self.lateral_rule not in ("behind", "side"):
            raise ValueError("lateral_rule must be 'behind' or 'side'")
        if self.gate_distance not in ("center", "clearance"):
            raise ValueError("gate_distance must be 'center' or 'clearance'")


@dataclass(frozen=True)
class SocialBubble:
    center: Vec2
    radius: float
    members: tuple[int, ...]

    def contains(self, p: Vec2) -> bool:
        return p.dist(self.center) < self.radius


def bubble_radius(p1: Vec2, p2: Vec2, config: PlannerConfig = PlannerConfig()) -> float:
    return 0.5 * p1.dist(p2) + config.pedestrian_radius + config.m_personal + config.m_group


def detect_group(
    pedestrians: Sequence[PedestrianState], config: PlannerConfig = PlannerConfig()
) -> SocialBubble | None:
    still = sorted(
        (p for p in pedestrians if p.velocity.norm() < config.group_speed_threshold),
        key=lambda p: p.id,
    )
    best = None
    for i in range(len(still)):
        for j in range(i + 1, len(still)):
            d = still[i].position.dist(still[j].position)
            if d - 2.0 * config.pedestrian_radius < config.group_gap_threshold and (best is None or d < best[0]):
                best = (d, still[i], still[j])
    if best is None:
        return None
    _, a, b = best
    center = (a.position + b.position) * 0.5
    return SocialBubble(center, bubble_radius(a.position, b.position, config), (a.id, b.id))


def _inside(p: Vec2, bounds: tuple[float, float, float] | None) -> bool:
    if bounds is None:
        return True
    w, h, margin = bounds
    return margin <= p.x <= w - margin and margin <= p.y <= h - margin


def detour_waypoint(
    wc_position: Vec2,
    goal: Vec2,
    bubble: SocialBubble,
    config: PlannerConfig = PlannerConfig(),
    bounds: tuple[float, float, float] | None = None,
) -> Vec2:
    """Waypoint that routes around ``bubble`` on the side needing the smaller heading change.

    Returns ``goal`` once the straight segment to it keeps the clearance ring free.
    ``bounds`` is (width, height, margin); a side whose waypoint would leave the
    arena is abandoned for the other one.
    """
    c, r = bubble.center, bubble.radius
    ring = r + config.detour_clearance
    offset = wc_position - c
    dist = offset.norm()

    if dist < r:
        if dist == 0.0:
            away = (goal - wc_position).perp() if goal != wc_position else Vec2(0.0, 1.0)
            return c + away.unit() * ring
        return c + offset * (ring / dist)

    if segment_point_distance(wc_position, goal, c) >= ring:
        return goal

    route = goal - wc_position
    if route.norm() == 0.0:
        return goal
    side = -1.0 if route.cross(c - wc_position) > 0.0 else 1.0

    def candidate(s: float) -> Vec2:
        abeam = c + route.unit().perp() * (s * ring)
        if segment_point_distance(wc_position, abeam, c) >= r + 0.5 * config.detour_clearance:
            return abeam
        u = offset * (1.0 / dist)
        alpha = max(math.acos(min(1.0, ring / dist)), config.detour_min_arc)
        return c + u.rotate(-s * alpha) * ring

    wp = candidate(side)
    if not _inside(wp, bounds):
        other = candidate(-side)
        if _inside(other, bounds):
            return other
    return wp


def gated_speed(d_ped: float, d_stop: float, d_slow: float, v_slow: float, v_nom: float) -> float:
    if d_ped < d_stop:
        return 0.0
    if d_ped < d_slow:
        return v_slow
    return v_nom


def reference_speed(intent: Intent, d_ped: float, config: PlannerConfig = PlannerConfig()) -> float:
    if d_ped < 0:
        raise ValueError("distance must be non-negative")
    if intent is Intent.CONSTANT_VELOCITY:
        return config.v_nom
    d_stop, d_slow, v_slow = config.thresholds(intent)
    return gated_speed(d_ped, d_stop, d_slow, v_slow, config.v_nom)


def _lateral_waypoint(wc: Vec2, goal: Vec2, ped: PedestrianState, config: PlannerConfig) -> Vec2:
    """Goal-direction point shifted sideways, away from the pedestrian.

    A pedestrian moving across the route is passed behind: the offset goes to
    the side it is walking away from. A still pedestrian is avoided by moving
    to the opposite side of the route from it.
    """
    to_goal = goal - wc
    dist = to_goal.norm()
    if dist == 0.0:
        return goal
    heading = to_goal * (1.0 / dist)
    ahead = wc + heading * min(config.lateral_lookahead, dist)
    left = heading.perp()
    lateral_v = ped.velocity.dot(left)
    if config.lateral_rule == "behind" and abs(lateral_v) >= config.group_speed_threshold:
        away = -1.0 if lateral_v > 0.0 else 1.0
    else:
        away = -1.0 if heading.cross(ped.position - wc) > 0.0 else 1.0
    return ahead + left * (away * config.lateral_offset)


def plan(
    observation: Observation,
    hypothesis: Hypothesis | None = None,
    bubble: SocialBubble | None = None,
    config: PlannerConfig = PlannerConfig(),
    bounds: tuple[float, float, float] | None = None,
) -> tuple[Vec2, float]:
    """Return (waypoint, v_ref). ``hypothesis=None`` is the ablated planner."""
    wc = observation.wheelchair.position
    goal = observation.goal
    nearest, d_ped = observation.nearest_pedestrian()
    if nearest is not None and config.gate_distance == "clearance":
        d_ped = max(0.0, d_ped - observation.wheelchair.radius - nearest.radius)

    if hypothesis is None:
        d_stop, d_slow, v_slow = config.thresholds(None)
        return goal, gated_speed(d_ped, d_stop, d_slow, v_slow, config.v_nom)

    intent = hypothesis.label_of(nearest.id) if nearest is not None else Intent.CONSTANT_VELOCITY
    if bubble is not None and segment_point_distance(wc, goal, bubble.center) < bubble.radius + config.detour_clearance:
        waypoint = detour_waypoint(wc, goal, bubble, config, bounds)
    elif nearest is not None and intent is Intent.RUSH and d_ped < config.d_slow:
        waypoint = _lateral_waypoint(wc, goal, nearest, config)
        if bubble is not None and bubble.contains(waypoint):
            waypoint = goal
    else:
        waypoint = goal
    return waypoint, reference_speed(intent, d_ped, config)


def pure_pursuit_raw(
    x: float, y: float, theta: float, v: float, wx: float, wy: float, v_ref: float, gains: ControllerConfig
) -> tuple[float, float]:
    """Float-level controller used inside rollouts; returns (a, omega)."""
    dx, dy = wx - x, wy - y
    if dx == 0.0 and dy == 0.0:
        return clip(-gains.k_v * v, gains.a_min, gains.a_max), 0.0
    omega = clip(gains.k_theta * wrap_angle(math.atan2(dy, dx) - theta), -gains.omega_max, gains.omega_max)
    a = clip(gains.k_v * (v_ref - v), gains.a_min, gains.a_max)
    return a, omega


def pure_pursuit(
    state: WheelchairState, waypoint: Vec2, v_ref: float, gains: ControllerConfig = ControllerConfig()
) -> ControlCommand:
    p = state.position
    a, omega = pure_pursuit_raw(p.x, p.y, state.heading, state.linear_velocity, waypoint.x, waypoint.y, v_ref, gains)
    return ControlCommand(a, omega)
