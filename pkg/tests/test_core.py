import math

import numpy as np
import pytest

from saatt_nav.core import (
    Pose,
    Vec2,
    clip,
    segment_intersects_disk,
    segment_point_distance,
    segments_intersect,
    wrap_angle,
)


@pytest.mark.parametrize(
    "angle, expected",
    [(0.0, 0.0), (2 * math.pi, 0.0), (3 * math.pi / 2, -math.pi / 2), (math.pi, math.pi), (-math.pi, math.pi)],
)
def test_wrap_angle_examples(angle, expected):
    assert wrap_angle(angle) == pytest.approx(expected, abs=1e-12)


def test_wrap_angle_rejects_non_finite():
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(ValueError):
            wrap_angle(bad)


def test_wrap_angle_range_idempotence_and_periodicity():
    rng = np.random.default_rng(1)
    for x in rng.uniform(-50, 50, 2000):
        w = wrap_angle(float(x))
        assert -math.pi < w <= math.pi
        assert wrap_angle(w) == w
        for n in range(-10, 11):
            shifted = wrap_angle(float(x) + 2 * math.pi * n)
            diff = abs(shifted - w)
            assert min(diff, 2 * math.pi - diff) < 1e-9


@pytest.mark.parametrize("value, lo, hi, expected", [(0.5, 0, 1, 0.5), (2.0, -1, 1, 1.0), (-3.0, -1, 1, -1.0)])
def test_clip_examples(value, lo, hi, expected):
    assert clip(value, lo, hi) == expected


def test_clip_rejects_inverted_interval():
    with pytest.raises(ValueError):
        clip(0.0, 1.0, -1.0)


def test_clip_fuzz_stays_in_bounds():
    rng = np.random.default_rng(2)
    vals = rng.normal(0, 10, (100_000, 3))
    for v, a, b in vals:
        lo, hi = min(a, b), max(a, b)
        out = clip(float(v), float(lo), float(hi))
        assert lo <= out <= hi
        if lo <= v <= hi:
            assert out == v


def test_vec2_arithmetic():
    a, b = Vec2(1.0, 2.0), Vec2(3.0, -1.0)
    assert a + b == Vec2(4.0, 1.0)
    assert b - a == Vec2(2.0, -3.0)
    assert a * 2 == Vec2(2.0, 4.0)
    assert -a == Vec2(-1.0, -2.0)
    assert a.dot(b) == 1.0
    assert a.cross(b) == -7.0
    assert Vec2(3.0, 4.0).norm() == 5.0
    assert Vec2(1.0, 0.0).perp() == Vec2(-0.0, 1.0)
    r = Vec2(1.0, 0.0).rotate(math.pi / 2)
    assert r.x == pytest.approx(0.0, abs=1e-15) and r.y == pytest.approx(1.0)


def test_vec2_rejects_non_finite_and_zero_unit():
    with pytest.raises(ValueError):
        Vec2(math.nan, 0.0)
    with pytest.raises(ValueError):
        Vec2(0.0, 0.0).unit()


def test_pose_heading_is_wrapped():
    assert Pose(Vec2(0, 0), 3 * math.pi / 2).heading == pytest.approx(-math.pi / 2)


def test_segment_helpers():
    a, b = Vec2(0.0, 0.0), Vec2(10.0, 0.0)
    assert segment_point_distance(a, b, Vec2(5.0, 3.0)) == 3.0
    assert segment_point_distance(a, b, Vec2(-3.0, 4.0)) == 5.0
    assert segment_intersects_disk(a, b, Vec2(5.0, 1.0), 1.1)
    assert not segment_intersects_disk(a, b, Vec2(5.0, 2.0), 1.1)
    assert segments_intersect(a, b, Vec2(5.0, -1.0), Vec2(5.0, 1.0))
    assert not segments_intersect(a, b, Vec2(5.0, 0.5), Vec2(5.0, 1.0))
