"""Geometric primitives shared by the simulator, planners and metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> Vec2:
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def dot(self, other: Vec2) -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: Vec2) -> float:
        """z-component of the 3D cross product; positive when `other` is to the left."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dist(self, other: Vec2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def unit(self) -> Vec2:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return Vec2(self.x / n, self.y / n)

    def perp(self) -> Vec2:
        """Counter-clockwise rotation by 90 degrees."""
        return Vec2(-self.y, self.x)

    def rotate(self, angle: float) -> Vec2:
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def wrap_angle(angle: float) -> float:
    """Map an angle to the half-open interval (-pi, pi]."""
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle}")
    wrapped = math.fmod(angle + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


def clip(value: float, lo: float, hi: float) -> float:
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    if value < lo:
        return lo
    if value > hi:
        return hi
    return value


@dataclass(frozen=True, slots=True)
class Pose:
    position: Vec2
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", wrap_angle(self.heading))


def segment_point_distance(a: Vec2, b: Vec2, p: Vec2) -> float:
    """Shortest distance from point p to the closed segment ab."""
    ab = b - a
    denom = ab.dot(ab)
    if denom == 0.0:
        return a.dist(p)
    t = clip((p - a).dot(ab) / denom, 0.0, 1.0)
    return (a + ab * t).dist(p)


def segment_intersects_disk(a: Vec2, b: Vec2, center: Vec2, radius: float) -> bool:
    return segment_point_distance(a, b, center) < radius


def segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool:
    """Proper or touching intersection of two closed segments."""
    d1 = (p2 - p1).cross(q1 - p1)
    d2 = (p2 - p1).cross(q2 - p1)
    d3 = (q2 - q1).cross(p1 - q1)
    d4 = (q2 - q1).cross(p2 - q1)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True

    def on_seg(a: Vec2, b: Vec2, c: Vec2) -> bool:
        return min(a.x, b.x) <= c.x <= max(a.x, b.x) and min(a.y, b.y) <= c.y <= max(a.y, b.y)

    if d1 == 0 and on_seg(p1, p2, q1):
        return True
    if d2 == 0 and on_seg(p1, p2, q2):
        return True
    if d3 == 0 and on_seg(q1, q2, p1):
        return True
    if d4 == 0 and on_seg(q1, q2, p2):
        return True
    return False
