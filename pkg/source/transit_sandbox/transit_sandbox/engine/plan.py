"""Route plans and the schedule projection shared by the engine and the insertion heuristics.

Every time on a plan lives on the simulation grid: legs take ``steps_for_distance`` whole steps
and dwells end at ``stop_departure``. The projection therefore predicts exactly what the engine
later executes.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

from transit_sandbox.core.geometry import EPS, SECONDS_PER_HOUR, Direction, Metric, Point, backward_km, distance

_STOP_IDS = itertools.count()


class StopKind(str, Enum):
    CHECKPOINT = "checkpoint"
    FIXED_STOP = "fixed_stop"
    VIRTUAL_STOP = "virtual_stop"
    DEPOT = "depot"


@dataclass(eq=False)
class RouteStop:
    """A planned visit of a vehicle.

    Stops on a committed plan are treated as values: insertion builds new stop objects through
    :meth:`merged` and keeps ``uid`` so the same visit can be matched across plan versions.
    """

    location: Point
    kind: StopKind
    pickups: frozenset[int] = frozenset()
    dropoffs: frozenset[int] = frozenset()
    planned_arrival: float | None = None
    scheduled_departure: float | None = None
    """Timetable departure (checkpoints only)."""
    hold_until: float | None = None
    """Latest walker arrival; the vehicle does not start its dwell before it."""
    direction: Direction | None = None
    trip: int | None = None
    stop_index: int | None = None
    """Index of the fixed stop or checkpoint on the line."""
    uid: int = field(default_factory=lambda: next(_STOP_IDS))

    def __post_init__(self):
        if self.kind is StopKind.VIRTUAL_STOP and not (self.pickups or self.dropoffs):
            raise ValueError("a virtual stop needs at least one pickup or drop-off")

    def merged(self, pickup: int | None = None, dropoff: int | None = None, hold: float | None = None) -> RouteStop:
        """Copy of the stop that also serves ``pickup`` / ``dropoff``."""
        pickups = self.pickups | {pickup} if pickup is not None else self.pickups
        dropoffs = self.dropoffs | {dropoff} if dropoff is not None else self.dropoffs
        hold_until = self.hold_until
        if hold is not None:
            hold_until = hold if hold_until is None else max(hold_until, hold)
        return replace(self, pickups=pickups, dropoffs=dropoffs, hold_until=hold_until)


@dataclass
class RoutePlan:
    """Ordered stops of a vehicle; ``stops[cursor:]`` is still ahead."""

    stops: list[RouteStop] = field(default_factory=list)
    cursor: int = 0

    @property
    def remaining(self) -> list[RouteStop]:
        return self.stops[self.cursor :]

    @property
    def next_stop(self) -> RouteStop | None:
        return self.stops[self.cursor] if self.cursor < len(self.stops) else None

    def advance(self) -> RouteStop:
        stop = self.stops[self.cursor]
        self.cursor += 1
        return stop

    def extend(self, stops: Iterable[RouteStop]):
        self.stops.extend(stops)

    def replace_remaining(self, stops: Sequence[RouteStop]):
        self.stops[self.cursor :] = list(stops)

    def compact(self, keep: int = 0):
        """Forget visited stops, keeping the last ``keep`` of them."""
        drop = max(0, self.cursor - keep)
        if drop:
            del self.stops[:drop]
            self.cursor -= drop


##
# Timing.
##


def steps_for_distance(d: float, speed: float, time_step: float) -> int:
    """Whole simulation steps needed to drive ``d`` km at ``speed`` km/h."""
    if d <= EPS:
        return 0
    return max(1, math.ceil(d / (speed * time_step / SECONDS_PER_HOUR) - EPS))


def stop_departure(stop: RouteStop, arrival: float, t_d: float) -> float:
    """Departure time of a vehicle reaching ``stop`` at ``arrival``."""
    start = arrival if stop.hold_until is None else max(arrival, stop.hold_until)
    departure = start + t_d
    if stop.scheduled_departure is not None:
        departure = max(departure, stop.scheduled_departure)
    return departure


@dataclass(frozen=True)
class Kinematics:
    """Movement constants of a run."""

    speed: float
    time_step: float
    t_d: float
    metric: Metric = Metric.RECTILINEAR

    @property
    def step_km(self) -> float:
        return self.speed * self.time_step / SECONDS_PER_HOUR

    def leg_steps(self, a: Point, b: Point) -> int:
        return steps_for_distance(distance(a, b, self.metric), self.speed, self.time_step)

    def leg_time(self, a: Point, b: Point) -> float:
        return self.leg_steps(a, b) * self.time_step


@dataclass(frozen=True)
class PlanAnchor:
    """Where a vehicle's remaining plan starts from."""

    position: Point
    ready_time: float
    """Earliest time the vehicle starts a new leg."""
    load: int
    capacity: int
    first_arrival: float | None = None
    """Arrival time at the leading stop when the vehicle is already driving there."""
    section_backtrack: float = 0.0


@dataclass
class Projection:
    """Predicted execution of a stop sequence."""

    arrivals: list[float]
    departures: list[float]
    ready: list[float]
    """``max(arrival, hold) + t_d`` per stop, i.e. departure ignoring the timetable."""
    pickup_time: dict[int, float]
    dropoff_time: dict[int, float]
    max_load: int
    max_backtrack: float
    end_time: float
    load_ok: bool


def project(
    anchor: PlanAnchor,
    stops: Sequence[RouteStop],
    kinematics: Kinematics,
    reach_times: Mapping[int, float],
) -> Projection:
    """Predict arrivals, departures, pickups and drop-offs along ``stops``.

    Args:
        anchor: Vehicle state the plan starts from.
        stops: Remaining stops in visiting order.
        kinematics: Speed, time step, dwell and metric.
        reach_times: Earliest boarding time of every passenger picked up on ``stops``.

    Returns:
        The projection. Backtracking is accumulated per checkpoint section (reset when a
        checkpoint is departed) against each leg's destination direction.
    """
    dt = kinematics.time_step
    t_d = kinematics.t_d
    n = len(stops)
    arrivals = [0.0] * n
    departures = [0.0] * n
    ready = [0.0] * n
    pickup_time: dict[int, float] = {}
    dropoff_time: dict[int, float] = {}
    load = anchor.load
    max_load = load
    back = anchor.section_backtrack
    max_back = back
    position = anchor.position
    clock = anchor.ready_time
    for i, stop in enumerate(stops):
        if i == 0 and anchor.first_arrival is not None:
            arrival = anchor.first_arrival
        else:
            arrival = clock + kinematics.leg_steps(position, stop.location) * dt
            if stop.direction is not None:
                back += backward_km(position, stop.location, stop.direction)
        if back > max_back:
            max_back = back
        for pid in stop.dropoffs:
            dropoff_time[pid] = arrival
        load -= len(stop.dropoffs)
        for pid in stop.pickups:
            pickup_time[pid] = max(arrival, reach_times[pid])
        load += len(stop.pickups)
        if load > max_load:
            max_load = load
        start = arrival if stop.hold_until is None else max(arrival, stop.hold_until)
        ready_i = start + t_d
        departure = ready_i if stop.scheduled_departure is None else max(ready_i, stop.scheduled_departure)
        if stop.kind is StopKind.CHECKPOINT:
            back = 0.0
        arrivals[i], ready[i], departures[i] = arrival, ready_i, departure
        position = stop.location
        clock = departure
    projection = Projection(
        arrivals=arrivals,
        departures=departures,
        ready=ready,
        pickup_time=pickup_time,
        dropoff_time=dropoff_time,
        max_load=max_load,
        max_backtrack=max_back,
        end_time=clock,
        load_ok=max_load <= anchor.capacity,
    )
    return projection


def insert_point(
    stops: Sequence[RouteStop],
    index: int,
    point: Point,
    *,
    pickup: int | None = None,
    dropoff: int | None = None,
    hold: float | None = None,
) -> tuple[list[RouteStop], int, bool]:
    """Insert a visit to ``point`` before ``stops[index]``.

    A point equal to the location of the stop it follows is merged into that stop.

    Returns:
        The new stop list, the position of the stop serving ``point`` and whether it was merged.
    """
    if index > 0 and stops[index - 1].location == point:
        merged = stops[index - 1].merged(pickup, dropoff, hold)
        return [*stops[: index - 1], merged, *stops[index:]], index - 1, True
    follower = stops[index] if index < len(stops) else None
    stop = RouteStop(
        location=point,
        kind=StopKind.VIRTUAL_STOP,
        pickups=frozenset() if pickup is None else frozenset({pickup}),
        dropoffs=frozenset() if dropoff is None else frozenset({dropoff}),
        hold_until=hold,
        direction=follower.direction if follower is not None else None,
        trip=follower.trip if follower is not None else None,
    )
    return [*stops[:index], stop, *stops[index:]], index, False
