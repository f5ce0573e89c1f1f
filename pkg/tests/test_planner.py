import math

import pytest

from saatt_nav.core import Pose, Vec2, segment_point_distance
from saatt_nav.env import Observation, PedestrianScript, PedestrianState, WheelchairState
from saatt_nav.intent import Hypothesis, Intent
from saatt_nav.planner import (
    ControllerConfig,
    PlannerConfig,
    SocialBubble,
    bubble_radius,
    detect_group,
    detour_waypoint,
    plan,
    pure_pursuit,
    reference_speed,
)

CV, Y, R = Intent.CONSTANT_VELOCITY, Intent.YIELD, Intent.RUSH


def still(pid, x, y):
    return PedestrianState(pid, Vec2(x, y), Vec2(0.0, 0.0))


def walking(pid, x, y, vx, vy):
    return PedestrianState(pid, Vec2(x, y), Vec2(vx, vy), script=PedestrianScript("crossing", math.hypot(vx, vy)))


def observe(wc=Vec2(1.0, 5.0), goal=Vec2(9.0, 5.0), peds=(), theta=0.0, v=0.0):
    return Observation(0, WheelchairState(Pose(wc, theta), v), tuple(peds), goal)


def test_bubble_radius_examples():
    assert bubble_radius(Vec2(0, 0), Vec2(1, 0)) == pytest.approx(1.1, abs=1e-9)
    assert bubble_radius(Vec2(0, 0), Vec2(0, 0)) == pytest.approx(0.6, abs=1e-9)
    r1 = bubble_radius(Vec2(0, 0), Vec2(1, 0))
    r2 = bubble_radius(Vec2(0, 0), Vec2(2, 0))
    assert r2 - r1 == pytest.approx(0.5, abs=1e-12)


def test_detect_group_examples():
    b = detect_group([still(0, 5.0, 4.5), still(1, 5.0, 5.5)])
    assert b is not None and b.members == (0, 1) and b.center == Vec2(5.0, 5.0)
    assert detect_group([still(0, 5.0, 4.5), walking(1, 5.0, 5.5, 0.5, 0.0)]) is None
    assert detect_group([still(0, 5.0, 4.5)]) is None


def test_detour_example():
    bubble = SocialBubble(Vec2(5.0, 5.0), 1.1, (0, 1))
    wp = detour_waypoint(Vec2(0.0, 5.0), Vec2(10.0, 5.0), bubble)
    assert wp.x == pytest.approx(5.0, abs=1e-9)
    assert abs(wp.y - 5.0) == pytest.approx(1.1 + PlannerConfig().detour_clearance, abs=1e-9)
    assert wp.y > 5.0  # a dead-centre route breaks the tie to the left


def test_detour_noop_and_escape():
    bubble = SocialBubble(Vec2(5.0, 5.0), 1.1, (0, 1))
    assert detour_waypoint(Vec2(0.0, 8.0), Vec2(10.0, 8.0), bubble) == Vec2(10.0, 8.0)
    inside = Vec2(5.3, 5.2)
    wp = detour_waypoint(inside, Vec2(10.0, 5.0), bubble)
    assert wp.dist(bubble.center) > inside.dist(bubble.center)


@pytest.mark.parametrize("intent, d, expected", [(CV, 0.1, 1.5), (R, 0.5, 0.0), (Y, 1.2, 0.3), (R, 0.8, 0.5)])
def test_reference_speed_examples(intent, d, expected):
    assert reference_speed(intent, d) == expected


def test_reference_speed_monotone():
    ds = [i * 0.01 for i in range(400)]
    for intent in Intent:
        vs = [reference_speed(intent, d) for d in ds]
        assert all(a <= b for a, b in zip(vs, vs[1:]))


def test_plan_open_space():
    assert plan(observe(), Hypothesis({}, "x")) == (Vec2(9.0, 5.0), 1.5)


def test_plan_detours_conversing_pair_and_ablation_does_not():
    peds = [still(0, 5.0, 4.4), still(1, 5.0, 5.6)]
    o = observe(peds=peds)
    bubble = detect_group(peds)
    wp, _ = plan(o, Hypothesis({0: CV, 1: CV}, "x"), bubble)
    assert segment_point_distance(Vec2(1.0, 5.0), Vec2(9.0, 5.0), wp) > 0.5
    assert not bubble.contains(wp)
    assert plan(o, None, None)[0] == Vec2(9.0, 5.0)


def test_plan_gates_use_body_clearance():
    # centre distance 1.5 m is 0.8 m between body edges: inside the base slow gate only
    o = observe(wc=Vec2(3.5, 5.0), peds=[still(0, 5.0, 5.0)])
    assert plan(o, None)[1] == 0.5
    assert plan(o, Hypothesis({0: Y}, "x"))[1] == 0.0  # 0.8 < yield stop radius 0.9
    assert plan(o, Hypothesis({0: CV}, "x"))[1] == 1.5


def test_rush_side_step_passes_behind():
    # pedestrian walks from right (y < route) to left; pass behind it, i.e. to the right
    o = observe(wc=Vec2(4.0, 5.0), peds=[walking(0, 5.2, 4.7, 0.0, 0.6)])
    wp, _ = plan(o, Hypothesis({0: R}, "x"))
    assert wp.y < 5.0


def test_pure_pursuit_examples():
    wc = WheelchairState(Pose(Vec2(0.0, 0.0), 0.0), 0.0)
    cmd = pure_pursuit(wc, Vec2(0.0, 1.0), 0.0)
    assert cmd.omega == 1.0
    moving = WheelchairState(Pose(Vec2(0.0, 0.0), 0.0), 1.2)
    cmd = pure_pursuit(moving, Vec2(3.0, 0.0), 1.2)
    assert (cmd.a, cmd.omega) == (0.0, 0.0)
    cmd = pure_pursuit(wc, Vec2(3.0, 0.0), 1.5)
    assert cmd.a == 1.5
    cmd = pure_pursuit(wc, Vec2(3.0, 0.0), 1.5, ControllerConfig(k_v=5.0))
    assert cmd.a == 2.0


def test_planner_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(d_stop=1.2).validate()
    with pytest.raises(ValueError):
        PlannerConfig(lateral_rule="left").validate()
    PlannerConfig().validate()
