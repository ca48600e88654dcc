from __future__ import annotations

from dataclasses import dataclass

from transit_sandbox.core.geometry import Direction, Metric, Point, distance
from transit_sandbox.core.params import FixedDesign, ScenarioParams
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.errors import DegenerateTripError


def line_positions(count: int, length: float, width: float) -> tuple[Point, ...]:
    """``count`` points evenly spaced on the route axis ``y = W/2``, terminals included."""
    if count == 1:
        return (Point(length / 2.0, width / 2.0),)
    return tuple(Point(i * length / (count - 1), width / 2.0) for i in range(count))


@dataclass(frozen=True)
class FixedLayout:
    """Stops of a fixed line, ordered by ``x``."""

    stop_positions: tuple[Point, ...]

    @classmethod
    def for_design(cls, design: FixedDesign, scenario: ScenarioParams) -> FixedLayout:
        if design.stop_x is not None:
            return cls(tuple(Point(x, scenario.W / 2.0) for x in design.stop_x))
        return cls(line_positions(design.S, scenario.L, scenario.W))

    def __len__(self) -> int:
        return len(self.stop_positions)

    def nearest_stop(self, point: Point, metric: Metric = Metric.RECTILINEAR) -> int:
        """Index of the closest stop; ties go to the lower index."""
        best, best_d = 0, float("inf")
        for index, stop in enumerate(self.stop_positions):
            d = distance(point, stop, metric)
            if d < best_d - 1e-12:
                best, best_d = index, d
        return best


@dataclass(frozen=True)
class FixedAssignment:
    boarding_index: int
    alighting_index: int
    direction: Direction


def assign_fixed(passenger: Passenger, layout: FixedLayout, metric: Metric = Metric.RECTILINEAR) -> FixedAssignment:
    """Boarding and alighting stops of a fixed-route passenger.

    Raises:
        DegenerateTripError: If both ends map to the same stop.
    """
    board = layout.nearest_stop(passenger.origin, metric)
    alight = layout.nearest_stop(passenger.destination, metric)
    if board == alight:
        raise DegenerateTripError(f"passenger {passenger.id}: origin and destination share stop {board}")
    direction = Direction.FORWARD if layout.stop_positions[alight].x > layout.stop_positions[board].x else Direction.BACKWARD
    return FixedAssignment(board, alight, direction)
