"""Per-trial navigation metrics and min-max normalisation for radar summaries."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

from .env import WorldConfig
from .planner import PlannerConfig, SocialBubble, detect_group

METRIC_NAMES = (
    "collision_count",
    "min_ped_distance",
    "bubble_intrusion_steps",
    "travel_time",
    "path_length",
    "success",
    "mean_angular_velocity",
    "mean_jerk",
)

# Direction used by the statistics and the radar plot.
HIGHER_IS_BETTER = {"min_ped_distance", "success"}


@dataclass(frozen=True)
class TrialMetrics:
    collision_count: int
    min_ped_distance: float | None  # None when the scenario has no pedestrians
    bubble_intrusion_steps: int
    travel_time: float
    path_length: float
    success: bool
    mean_angular_velocity: float
    mean_jerk: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> TrialMetrics:
        return cls(**{k: d[k] for k in METRIC_NAMES})


def layout_bubble(pedestrians, planner: PlannerConfig = PlannerConfig()) -> SocialBubble | None:
    """Ground-truth social bubble of a layout (the conversing pair), if any."""
    return detect_group(pedestrians, planner)


def from_history(
    positions: Sequence[tuple[float, float]],
    pedestrian_tracks: Sequence[Sequence[tuple[float, float]]],
    omegas: Sequence[float],
    success: bool,
    steps: int,
    bubble: SocialBubble | None = None,
    world: WorldConfig = WorldConfig(),
) -> TrialMetrics:
    """Metrics from a trial history.

    ``positions[t]`` is the wheelchair centre at state t (t = 0..steps),
    ``pedestrian_tracks[t]`` lists pedestrian centres at the same state and
    ``omegas`` holds the commanded angular velocities.
    """
    dt = world.dt
    collisions = 0
    intrusions = 0
    d_min = math.inf
    for (x, y), peds in zip(positions, pedestrian_tracks):
        nearest = min((math.hypot(px - x, py - y) for px, py in peds), default=math.inf)
        d_min = min(d_min, nearest)
        if nearest < world.collision_distance:
            collisions += 1
        if bubble is not None and math.hypot(bubble.center.x - x, bubble.center.y - y) < bubble.radius:
            intrusions += 1

    path = sum(
        math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in zip(positions, positions[1:])
    )
    travel = steps * dt if success else world.max_steps * dt
    mean_w = sum(abs(w) for w in omegas) / len(omegas) if omegas else 0.0

    jerk = 0.0
    if len(positions) >= 4:
        vel = [((x1 - x0) / dt, (y1 - y0) / dt) for (x0, y0), (x1, y1) in zip(positions, positions[1:])]
        acc = [((b[0] - a[0]) / dt, (b[1] - a[1]) / dt) for a, b in zip(vel, vel[1:])]
        jerks = [math.hypot((b[0] - a[0]) / dt, (b[1] - a[1]) / dt) for a, b in zip(acc, acc[1:])]
        jerk = sum(jerks) / len(jerks)

    return TrialMetrics(
        collision_count=collisions,
        min_ped_distance=None if math.isinf(d_min) else d_min,
        bubble_intrusion_steps=intrusions,
        travel_time=travel,
        path_length=path,
        success=bool(success),
        mean_angular_velocity=mean_w,
        mean_jerk=jerk,
    )


def minmax_normalize(values: Sequence[float], lower_is_better: bool = False) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [1.0] * len(values)
    scaled = [(v - lo) / (hi - lo) for v in values]
    return [1.0 - s for s in scaled] if lower_is_better else scaled


def compute(record, layout, world: WorldConfig = WorldConfig(), planner: PlannerConfig = PlannerConfig()) -> TrialMetrics:
    """Metrics of a stored trial; a pure function of (record, layout)."""
    return from_history(
        [(s[0], s[1]) for s in record.states],
        [[(p[0], p[1]) for p in peds] for peds in record.pedestrian_positions],
        [c[1] for c in record.commands],
        record.success,
        record.steps,
        layout_bubble(layout.pedestrians, planner),
        world,
    )
