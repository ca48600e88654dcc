"""Checkpoint skeleton and timetable of the flexible-route service.

``S_c`` checkpoints are spread evenly on the route axis. Each inter-checkpoint segment is given
``t_c / (S_c - 1)`` seconds: the straight running time ``t_t``, one dwell ``t_d`` and the rest is
slack that deviations to virtual stops may consume. Vehicles shuttle between the terminal
checkpoints; trip ``j`` of a vehicle dispatched at ``τ`` leaves its start terminal at
``τ + t_d + j · period`` and every checkpoint at its timetabled time.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

from transit_sandbox.core.geometry import EPS, SECONDS_PER_HOUR, Direction, Point, backward_km
from transit_sandbox.core.params import FlexDesign, ScenarioParams, ceil_step
from transit_sandbox.engine.plan import Kinematics, Projection, RouteStop, StopKind
from transit_sandbox.engine.vehicle import Vehicle
from transit_sandbox.errors import DesignError
from transit_sandbox.policies.base import dispatch_times
from transit_sandbox.policies.fixed.layout import line_positions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlexSegment:
    """Time and backtracking budget between two consecutive checkpoints."""

    from_checkpoint: int
    to_checkpoint: int
    t_t: float
    """Running time between the checkpoints without deviation (s)."""
    slack_total: float
    slack_used: float = 0.0
    backtrack_used: float = 0.0
    """Backward travel in the segment (km)."""

    @property
    def slack_left(self) -> float:
        return self.slack_total - self.slack_used


def segment_timing(design: FlexDesign, scenario: ScenarioParams) -> tuple[float, float]:
    """Running time ``t_t`` and slack of one segment, both in seconds."""
    spacing = scenario.L / (design.S_c - 1)
    t_t = spacing / scenario.v_o * SECONDS_PER_HOUR
    slack = design.t_c / (design.S_c - 1) - t_t - design.t_d
    return t_t, slack


@dataclass(frozen=True)
class FlexTimetable:
    checkpoints: tuple[Point, ...]
    segments: tuple[FlexSegment, ...]
    t_c: float
    t_d: float
    time_step: float

    @classmethod
    def for_design(cls, design: FlexDesign, scenario: ScenarioParams) -> FlexTimetable:
        """Build the checkpoint skeleton.

        Raises:
            DesignError: If the segment slack is negative.
        """
        t_t, slack = segment_timing(design, scenario)
        if slack < -1e-6:
            raise DesignError(
                "t_c",
                "t_c",
                f"negative slack per segment: t_c/(S_c-1) - t_t - t_d = {design.t_c / (design.S_c - 1):.1f} - "
                f"{t_t:.1f} - {design.t_d:.1f} = {slack:.1f} s",
            )
        segments = tuple(FlexSegment(k, k + 1, t_t, max(0.0, slack)) for k in range(design.S_c - 1))
        return cls(
            checkpoints=line_positions(design.S_c, scenario.L, scenario.W),
            segments=segments,
            t_c=design.t_c,
            t_d=design.t_d,
            time_step=scenario.time_step,
        )

    @property
    def count(self) -> int:
        return len(self.checkpoints)

    @property
    def period(self) -> float:
        """Time between the starts of consecutive trips (s)."""
        return ceil_step(self.t_c, self.time_step)

    @staticmethod
    def trip_direction(trip: int) -> Direction:
        return Direction.FORWARD if trip % 2 == 0 else Direction.BACKWARD

    def trip_start(self, dispatch_time: float, trip: int) -> float:
        return dispatch_time + self.t_d + trip * self.period

    def departure(self, dispatch_time: float, trip: int, position: int) -> float:
        """Timetabled departure from the ``position``-th checkpoint of ``trip``."""
        offset = ceil_step(position * self.t_c / (self.count - 1), self.time_step)
        return self.trip_start(dispatch_time, trip) + offset

    def checkpoint_index(self, direction: Direction, position: int) -> int:
        return position if direction is Direction.FORWARD else self.count - 1 - position

    def trip_stops(self, dispatch_time: float, trip: int) -> list[RouteStop]:
        """Checkpoint stops of ``trip``; later trips start at the previous trip's terminal."""
        direction = self.trip_direction(trip)
        first = 0 if trip == 0 else 1
        return [
            RouteStop(
                self.checkpoints[self.checkpoint_index(direction, k)],
                StopKind.CHECKPOINT,
                scheduled_departure=self.departure(dispatch_time, trip, k),
                direction=direction,
                trip=trip,
                stop_index=self.checkpoint_index(direction, k),
            )
            for k in range(first, self.count)
        ]

    def is_terminal(self, stop: RouteStop) -> bool:
        if stop.kind is not StopKind.CHECKPOINT or stop.direction is None:
            return False
        return stop.stop_index == self.checkpoint_index(stop.direction, self.count - 1)


def flex_fleet(timetable: FlexTimetable, design: FlexDesign, scenario: ScenarioParams) -> list[Vehicle]:
    """Vehicles waiting at the first checkpoint, with their dispatch times."""
    times = dispatch_times(design.t_c, design.headway, design.V, scenario.time_step)
    start = timetable.checkpoints[0]
    fleet = []
    for vid in range(design.V):
        vehicle = Vehicle(vid, design.K, scenario.v_o, start, home=start)
        vehicle.dispatch_time = times[vid] if vid < len(times) else None
        fleet.append(vehicle)
    if len(times) < design.V:
        logger.warning(
            "Design '%s': %d of %d vehicles cover frequency %.2f/h; %d stay in reserve.",
            design.design_id,
            len(times),
            design.V,
            design.f,
            design.V - len(times),
        )
    return fleet


def init_flex(design: FlexDesign, scenario: ScenarioParams) -> tuple[list[Vehicle], FlexTimetable]:
    """Checkpoint skeleton plus the fleet that runs it."""
    timetable = FlexTimetable.for_design(design, scenario)
    return flex_fleet(timetable, design, scenario), timetable


def segment_ledger(stops: Sequence[RouteStop], projection: Projection, kinematics: Kinematics) -> list[FlexSegment]:
    """Slack and backtracking used by each segment that lies entirely on ``stops``.

    ``slack_used`` is the extra time deviations and walker holds add on top of the straight
    checkpoint-to-checkpoint run; ``slack_total`` is what the timetable grants for it.
    """
    ledger = []
    opening: int | None = None
    back = 0.0
    for i, stop in enumerate(stops):
        if opening is not None and i > opening:
            back += backward_km(stops[i - 1].location, stop.location, stop.direction)
        if stop.kind is not StopKind.CHECKPOINT:
            continue
        if opening is not None and stop.scheduled_departure is not None:
            start = stops[opening]
            base = kinematics.leg_time(start.location, stop.location) + kinematics.t_d
            elapsed = projection.ready[i] - projection.departures[opening]
            budget = stop.scheduled_departure - projection.departures[opening]
            ledger.append(
                FlexSegment(
                    start.stop_index,
                    stop.stop_index,
                    base - kinematics.t_d,
                    max(0.0, budget - base),
                    max(0.0, elapsed - base),
                    back,
                )
            )
        opening, back = i, 0.0
    return ledger


def within_timetable(segments: Sequence[FlexSegment]) -> bool:
    return all(segment.slack_used <= segment.slack_total + EPS for segment in segments)
