"""Geometry of the rectangular service region.

The route axis is ``x`` (``0 <= x <= L``), the cross axis is ``y`` (``0 <= y <= W``). Lengths are
kilometres, speeds km/h and durations seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

KM_PER_MILE = 1.609344
SECONDS_PER_HOUR = 3600.0
EPS = 1e-9


class Metric(str, Enum):
    """Distance metric used for walking and driving."""

    RECTILINEAR = "rectilinear"
    EUCLIDEAN = "euclidean"


class Direction(IntEnum):
    """Travel direction along the route axis."""

    FORWARD = 1
    BACKWARD = -1

    @property
    def reverse(self) -> Direction:
        return Direction(-self.value)


@dataclass(frozen=True)
class Point:
    """A location in the service region (km)."""

    x: float
    y: float

    def inside(self, length: float, width: float) -> bool:
        """Whether the point lies in the ``length`` x ``width`` rectangle (boundary included)."""
        return -EPS <= self.x <= length + EPS and -EPS <= self.y <= width + EPS


def rect_distance(p: Point, q: Point) -> float:
    """Rectilinear (L1) distance in km."""
    return abs(p.x - q.x) + abs(p.y - q.y)


def euclidean_distance(p: Point, q: Point) -> float:
    """Straight-line distance in km."""
    return math.hypot(p.x - q.x, p.y - q.y)


def distance(p: Point, q: Point, metric: Metric = Metric.RECTILINEAR) -> float:
    if metric is Metric.EUCLIDEAN:
        return euclidean_distance(p, q)
    return rect_distance(p, q)


def walk_time(p: Point, q: Point, v_w: float, metric: Metric = Metric.RECTILINEAR) -> float:
    """Walking duration between two points.

    Args:
        p: Start point.
        q: End point.
        v_w: Walking speed (km/h).
        metric: Distance metric.

    Returns:
        The walking duration in seconds.
    """
    return distance(p, q, metric) / v_w * SECONDS_PER_HOUR


def move_toward(position: Point, target: Point, step_km: float, metric: Metric = Metric.RECTILINEAR) -> Point:
    """Advance ``position`` by at most ``step_km`` toward ``target``.

    Rectilinear movement covers the x offset first and then the y offset. The target itself is
    returned once it is within reach.
    """
    remaining = distance(position, target, metric)
    if remaining <= step_km + EPS:
        return target
    if metric is Metric.EUCLIDEAN:
        ratio = step_km / remaining
        return Point(position.x + (target.x - position.x) * ratio, position.y + (target.y - position.y) * ratio)
    dx = target.x - position.x
    if abs(dx) >= step_km:
        return Point(position.x + math.copysign(step_km, dx), position.y)
    left = step_km - abs(dx)
    return Point(target.x, position.y + math.copysign(left, target.y - position.y))


def leg_foot(start: Point, end: Point, p: Point, metric: Metric = Metric.RECTILINEAR) -> Point:
    """Closest meeting point to ``p`` on the driven path from ``start`` to ``end``.

    Rectilinear legs are driven x first (see :func:`move_toward`): a horizontal run at the start's
    ``y`` followed by a vertical run at the end's ``x``. The foot is the nearer of the clipped
    projections on the two runs, the horizontal one on ties. For euclidean legs it is the
    orthogonal projection clipped to the segment.
    """
    if metric is Metric.EUCLIDEAN:
        vx, vy = end.x - start.x, end.y - start.y
        norm2 = vx * vx + vy * vy
        if norm2 <= EPS:
            return start
        t = ((p.x - start.x) * vx + (p.y - start.y) * vy) / norm2
        t = min(1.0, max(0.0, t))
        return Point(start.x + t * vx, start.y + t * vy)
    across = Point(min(max(start.x, end.x), max(min(start.x, end.x), p.x)), start.y)
    up = Point(end.x, min(max(start.y, end.y), max(min(start.y, end.y), p.y)))
    return up if rect_distance(p, up) < rect_distance(p, across) else across


def backward_km(start: Point, end: Point, direction: Direction | None) -> float:
    """Length of the ``start -> end`` leg travelled against ``direction`` along the route axis."""
    if direction is None:
        return 0.0
    return max(0.0, -int(direction) * (end.x - start.x))


def km_to_miles(km: float) -> float:
    return km / KM_PER_MILE
