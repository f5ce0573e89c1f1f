"""Forward rollouts of intent hypotheses and their safety/progress scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Vec2
from .env import Observation, WorldConfig, integrate
from .intent import Hypothesis, Intent
from .planner import ControllerConfig, SocialBubble, pure_pursuit_raw


@dataclass(frozen=True)
class RolloutConfig:
    h: int = 30
    alpha_yield: float = 0.2
    alpha_rush: float = 1.5
    d_safe: float = 2.0
    w_p: float = 10.0
    w_s: float = 20.0
    lambda_c: float = 50.0
    lambda_b: float = 100.0

    def validate(self) -> None:
        if self.h < 1:
            raise ValueError("rollout horizon must be at least one step")
        if not self.w_s > self.w_p:
            raise ValueError("safety weight must exceed progress weight")
        if not (0 <= self.alpha_yield < 1 < self.alpha_rush):
            raise ValueError("need alpha_yield < 1 < alpha_rush")
        if self.d_safe <= 0 or self.lambda_c < 0 or self.lambda_b < 0:
            raise ValueError("d_safe must be positive and penalties non-negative")


@dataclass(frozen=True)
class RolloutTrace:
    n_coll: int
    d_min: float
    d_0: float
    d_f: float
    bubble_intruded: bool = False


@dataclass(frozen=True)
class ScoredHypothesis:
    hypothesis: Hypothesis
    trace: RolloutTrace
    s_safety: float
    s_progress: float
    s_total: float
    index: int = 0


def modulate_velocity(v: Vec2, intent: Intent, config: RolloutConfig = RolloutConfig()) -> Vec2:
    if intent is Intent.YIELD:
        return v * config.alpha_yield
    if intent is Intent.RUSH:
        return v * config.alpha_rush
    return v


def rollout(
    observation: Observation,
    hypothesis: Hypothesis,
    config: RolloutConfig = RolloutConfig(),
    bubble: SocialBubble | None = None,
    *,
    world: WorldConfig = WorldConfig(),
    gains: ControllerConfig = ControllerConfig(),
    v_nom: float = 1.5,
) -> RolloutTrace:
    """Play ``hypothesis`` forward for ``config.h`` steps on a private copy of the state.

    The wheelchair pursues the goal at ``v_nom`` and holds once inside the goal
    tolerance; pedestrians keep their intent-modulated velocity.
    """
    wc = observation.wheelchair
    x, y, th, v = wc.position.x, wc.position.y, wc.heading, wc.linear_velocity
    gx, gy = observation.goal.x, observation.goal.y
    peds = []
    for p in observation.pedestrians:
        mv = modulate_velocity(p.velocity, hypothesis.label_of(p.id), config)
        peds.append([p.position.x, p.position.y, mv.x, mv.y])

    dt = world.dt
    coll_d = world.collision_distance
    tol = world.goal_tolerance
    if bubble is not None:
        bx, by, br = bubble.center.x, bubble.center.y, bubble.radius
    d_0 = math.hypot(gx - x, gy - y)
    d_min = math.inf
    n_coll = 0
    intruded = False

    for _ in range(config.h):
        if math.hypot(gx - x, gy - y) <= tol:
            a, omega = pure_pursuit_raw(x, y, th, v, x, y, 0.0, gains)
        else:
            a, omega = pure_pursuit_raw(x, y, th, v, gx, gy, v_nom, gains)
        x, y, th, v = integrate(x, y, th, v, a, omega, world)
        collided = False
        for p in peds:
            p[0] += p[2] * dt
            p[1] += p[3] * dt
            d = math.hypot(p[0] - x, p[1] - y)
            if d < d_min:
                d_min = d
            if d < coll_d:
                collided = True
        if collided:
            n_coll += 1
        if bubble is not None and not intruded and math.hypot(bx - x, by - y) < br:
            intruded = True

    d_f = math.hypot(gx - x, gy - y)
    return RolloutTrace(n_coll, d_min, d_0, d_f, intruded)


def safety_score(trace: RolloutTrace, config: RolloutConfig = RolloutConfig()) -> float:
    if trace.n_coll > 0:
        return max(0.0, 1.0 - 2.0 * trace.n_coll / config.h)
    if trace.d_min < config.d_safe:
        return min(1.0, trace.d_min / config.d_safe)
    return 1.0


def progress_score(trace: RolloutTrace) -> float:
    if trace.d_0 < 0:
        raise ValueError("goal distance cannot be negative")
    if trace.d_0 == 0.0:
        return 1.0
    return max(0.0, (trace.d_0 - trace.d_f) / trace.d_0)


def total_score(
    trace: RolloutTrace, s_safety: float, s_progress: float, config: RolloutConfig = RolloutConfig()
) -> float:
    return (
        config.w_p * s_progress
        + config.w_s * s_safety
        - config.lambda_c * trace.n_coll
        - config.lambda_b * (1.0 if trace.bubble_intruded else 0.0)
    )


def score(
    hypothesis: Hypothesis, trace: RolloutTrace, config: RolloutConfig = RolloutConfig(), index: int = 0
) -> ScoredHypothesis:
    s_s = safety_score(trace, config)
    s_p = progress_score(trace)
    return ScoredHypothesis(hypothesis, trace, s_s, s_p, total_score(trace, s_s, s_p, config), index)


def score_hypotheses(
    observation: Observation,
    hypotheses: Sequence[Hypothesis],
    config: RolloutConfig = RolloutConfig(),
    bubble: SocialBubble | None = None,
    *,
    world: WorldConfig = WorldConfig(),
    gains: ControllerConfig = ControllerConfig(),
    v_nom: float = 1.5,
) -> list[ScoredHypothesis]:
    return [
        score(h, rollout(observation, h, config, bubble, world=world, gains=gains, v_nom=v_nom), config, i)
        for i, h in enumerate(hypotheses)
    ]


def select_best(scored_list: Sequence[ScoredHypothesis]) -> ScoredHypothesis:
    """Highest total score; the earliest-generated hypothesis wins ties."""
    if not scored_list:
        raise ValueError("cannot select from an empty hypothesis list")
    best = scored_list[0]
    for s in scored_list[1:]:
        if s.s_total > best.s_total:
            best = s
    return best
