"""Fixed-timestep 2D world with a differential-drive wheelchair and scripted pedestrians."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .core import Pose, Vec2, clip, wrap_angle


class TrialTerminated(RuntimeError):
    """Raised when stepping a world whose trial has already ended."""


@dataclass(frozen=True)
class WorldConfig:
    arena_width: float = 10.0
    arena_height: float = 10.0
    dt: float = 0.1
    max_steps: int = 1000
    goal_tolerance: float = 0.5
    v_max: float = 1.5
    wheelchair_radius: float = 0.4
    pedestrian_radius: float = 0.3
    # Stored explicitly: 0.4 + 0.3 is 0.7000000000000001 in binary floating point.
    collision_distance: float = 0.7
    stop_on_collision: bool = False

    def validate(self) -> None:
        if self.dt <= 0 or self.max_steps <= 0:
            raise ValueError("dt and max_steps must be positive")
        if self.arena_width <= 0 or self.arena_height <= 0:
            raise ValueError("arena dimensions must be positive")
        if self.wheelchair_radius <= 0 or self.pedestrian_radius <= 0:
            raise ValueError("agent radii must be positive")
        if abs(self.collision_distance - (self.wheelchair_radius + self.pedestrian_radius)) > 1e-9:
            raise ValueError("collision_distance must equal wheelchair_radius + pedestrian_radius")
        if self.v_max <= 0 or self.goal_tolerance < 0:
            raise ValueError("v_max must be positive and goal_tolerance non-negative")

    def walls(self) -> list[tuple[Vec2, Vec2]]:
        w, h = self.arena_width, self.arena_height
        corners = [Vec2(0.0, 0.0), Vec2(w, 0.0), Vec2(w, h), Vec2(0.0, h)]
        return [(corners[i], corners[(i + 1) % 4]) for i in range(4)]


@dataclass(frozen=True)
class ControlCommand:
    a: float
    omega: float


@dataclass(frozen=True)
class WheelchairState:
    pose: Pose
    linear_velocity: float
    radius: float = 0.4

    @property
    def position(self) -> Vec2:
        return self.pose.position

    @property
    def heading(self) -> float:
        return self.pose.heading


@dataclass(frozen=True)
class PedestrianScript:
    """Behaviour descriptor: ``stationary`` (with a facing angle) or ``crossing`` at ``speed``."""

    kind: str = "stationary"
    speed: float = 0.0
    facing: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("stationary", "crossing"):
            raise ValueError(f"unknown pedestrian script {self.kind!r}")


@dataclass(frozen=True)
class PedestrianState:
    id: int
    position: Vec2
    velocity: Vec2
    radius: float = 0.3
    script: PedestrianScript = field(default_factory=PedestrianScript)

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("pedestrian radius must be positive")
        if self.script.kind == "stationary" and (self.velocity.x != 0.0 or self.velocity.y != 0.0):
            raise ValueError("stationary pedestrian must have zero velocity")

    def advanced(self, dt: float) -> PedestrianState:
        if self.script.kind == "stationary":
            return self
        return replace(self, position=self.position + self.velocity * dt)


@dataclass(frozen=True)
class Observation:
    """Everything a policy may look at during one control step."""

    step: int
    wheelchair: WheelchairState
    pedestrians: tuple[PedestrianState, ...]
    goal: Vec2
    arena: tuple[float, float] = (10.0, 10.0)

    def nearest_pedestrian(self) -> tuple[PedestrianState | None, float]:
        best, best_d = None, math.inf
        p = self.wheelchair.position
        for ped in self.pedestrians:
            d = ped.position.dist(p)
            if d < best_d:
                best, best_d = ped, d
        return best, best_d


def integrate(
    x: float,
    y: float,
    theta: float,
    v: float,
    a: float,
    omega: float,
    cfg: WorldConfig,
) -> tuple[float, float, float, float]:
    """One semi-implicit Euler step of unicycle kinematics, clamped to the arena."""
    v_new = clip(v + a * cfg.dt, 0.0, cfg.v_max)
    th_new = wrap_angle(theta + omega * cfg.dt)
    x_new = x + v_new * math.cos(th_new) * cfg.dt
    y_new = y + v_new * math.sin(th_new) * cfg.dt
    r = cfg.wheelchair_radius
    x_new = clip(x_new, r, cfg.arena_width - r)
    y_new = clip(y_new, r, cfg.arena_height - r)
    return x_new, y_new, th_new, v_new


def collision_violations(
    wc_position: Vec2, pedestrians, collision_distance: float = 0.7
) -> int:
    return sum(1 for ped in pedestrians if ped.position.dist(wc_position) < collision_distance)


def goal_reached(wc_position: Vec2, goal: Vec2, tolerance: float = 0.5) -> bool:
    return wc_position.dist(goal) <= tolerance


class World:
    """Mutable simulation state for one trial."""

    def __init__(
        self,
        config: WorldConfig,
        wheelchair: WheelchairState,
        pedestrians,
        goal: Vec2,
    ) -> None:
        self.config = config
        self.x = wheelchair.position.x
        self.y = wheelchair.position.y
        self.theta = wheelchair.heading
        self.v = wheelchair.linear_velocity
        self.pedestrians: list[PedestrianState] = list(pedestrians)
        self.goal = goal
        self.t = 0
        self.terminated = False

    @property
    def wheelchair(self) -> WheelchairState:
        return WheelchairState(
            Pose(Vec2(self.x, self.y), self.theta), self.v, self.config.wheelchair_radius
        )

    def observe(self) -> Observation:
        return Observation(
            step=self.t,
            wheelchair=self.wheelchair,
            pedestrians=tuple(self.pedestrians),
            goal=self.goal,
            arena=(self.config.arena_width, self.config.arena_height),
        )

    def collisions(self) -> int:
        return collision_violations(
            Vec2(self.x, self.y), self.pedestrians, self.config.collision_distance
        )

    def at_goal(self) -> bool:
        return goal_reached(Vec2(self.x, self.y), self.goal, self.config.goal_tolerance)

    def step(self, command: ControlCommand) -> World:
        if self.terminated:
            raise TrialTerminated(f"trial already terminated at step {self.t}")
        self.x, self.y, self.theta, self.v = integrate(
            self.x, self.y, self.theta, self.v, command.a, command.omega, self.config
        )
        dt = self.config.dt
        self.pedestrians = [ped.advanced(dt) for ped in self.pedestrians]
        self.t += 1
        return self

    def state_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.theta, self.v)
