"""Insertion of a request into a flexible-route vehicle plan.

A request is served on the trip heading its way: the rest of the current trip when the
directions match, otherwise the next trip. Within that section the pickup and the drop-off are
each placed either at the passenger's own location (direct) or at a meeting point on the route
reachable on foot within ``ζ_a`` (walking): an existing stop, or the foot of the passenger on a
planned leg.

A candidate is feasible when the vehicle never exceeds ``K``, no checkpoint becomes ready later
than its timetabled departure (or later than it already was), backtracking per checkpoint
section stays within ``ζ_b`` and every pickup on the plan happens within ``ζ_w``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from transit_sandbox.core.geometry import EPS, Direction, Point, backward_km, distance, leg_foot, walk_time
from transit_sandbox.core.params import FlexDesign, ScenarioParams, ceil_step
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.plan import Kinematics, Projection, RouteStop, StopKind, insert_point
from transit_sandbox.policies.insertion import (
    VehicleBaseline,
    existing_cost_delta,
    project_candidate,
    waits_within,
)


class InsertionMode(str, Enum):
    DIRECT = "direct"
    WALK = "walk"


@dataclass(frozen=True)
class MeetingPoint:
    """Where the vehicle meets a passenger end, relative to the baseline plan."""

    gap: int
    """The point is inserted before ``stops[gap]`` (or merged into ``stops[gap - 1]``)."""
    point: Point
    walk: float
    """Walking time on the time grid (s)."""
    walking: bool


@dataclass(frozen=True)
class FlexCandidate:
    vehicle_id: int
    k1: int
    k2: int
    cost: float
    stops: list[RouteStop]
    mode: InsertionMode
    pickup_point: Point
    dropoff_point: Point
    access_walk: float
    egress_walk: float
    pickup_time: float
    dropoff_time: float

    @property
    def key(self) -> tuple:
        mode_rank = 0 if self.mode is InsertionMode.DIRECT else 1
        return (
            self.cost,
            self.vehicle_id,
            self.k1,
            self.k2,
            mode_rank,
            self.pickup_point.x,
            self.pickup_point.y,
            self.dropoff_point.x,
            self.dropoff_point.y,
        )


@dataclass
class FlexSearchStats:
    pickup_options: int = 0
    dropoff_options: int = 0
    evaluated: int = 0
    feasible: int = 0


def passenger_direction(passenger: Passenger) -> Direction:
    return Direction.FORWARD if passenger.destination.x >= passenger.origin.x else Direction.BACKWARD


def _terminal_index(stops: Sequence[RouteStop], trip: int, checkpoint_count: int) -> int | None:
    for i, stop in enumerate(stops):
        if stop.trip != trip or stop.kind is not StopKind.CHECKPOINT:
            continue
        last = checkpoint_count - 1 if stop.direction is Direction.FORWARD else 0
        if stop.stop_index == last:
            return i
    return None


def insertion_section(stops: Sequence[RouteStop], direction: Direction, checkpoint_count: int) -> tuple[int, int] | None:
    """First and last index (inclusive) of the plan section a passenger heading ``direction`` rides on.

    The section starts at a stop already committed (the leading stop or the terminal of the
    current trip) and ends at the terminal checkpoint of the trip.
    """
    if not stops or stops[0].trip is None:
        return None
    trip = stops[0].trip
    end = _terminal_index(stops, trip, checkpoint_count)
    if end is None:
        return None
    if stops[0].direction is direction:
        return 0, end
    following = _terminal_index(stops, trip + 1, checkpoint_count)
    if following is None:
        return None
    return end, following


def _gap_points(
    stops: Sequence[RouteStop], gap: int, last: int, point: Point, walking: bool, scenario: ScenarioParams
) -> list[MeetingPoint]:
    """Meeting points for ``point`` between ``stops[gap - 1]`` and ``stops[gap]``.

    ``last`` is the index of the section's terminal; past it only the terminal itself can be used.
    A passenger standing on a planned stop is served there as a direct option merged into the
    stop; walking options always have a positive walk.
    """
    prev = stops[gap - 1].location
    options = []
    if gap <= last or point == prev:
        options.append(MeetingPoint(gap, point, 0.0, False))
    if not walking:
        return options
    metric = scenario.metric
    candidates = [prev]
    if gap <= last:
        foot = leg_foot(prev, stops[gap].location, point, metric)
        if foot != prev and foot != stops[gap].location:
            candidates.append(foot)
    for meet in candidates:
        d = distance(point, meet, metric)
        if EPS < d <= scenario.zeta_a + EPS:
            walk = ceil_step(walk_time(point, meet, scenario.v_w, metric), scenario.time_step)
            options.append(MeetingPoint(gap, meet, walk, True))
    return options


def meeting_points(
    stops: Sequence[RouteStop], section: tuple[int, int], point: Point, walking: bool, scenario: ScenarioParams
) -> list[MeetingPoint]:
    """Every meeting point for ``point`` in ``section`` (direct first, then walking, per gap)."""
    first, last = section
    options = []
    for gap in range(first + 1, last + 2):
        options.extend(_gap_points(stops, gap, last, point, walking, scenario))
    return options


##
# Prefilter.
##


def gap_budgets(baseline: VehicleBaseline, section: tuple[int, int], t_d: float) -> dict[int, float]:
    """Largest delay an insertion before ``stops[g]`` can cause without breaking the timetable.

    Delay reaching a stop is absorbed by the time the vehicle would have waited there for a walker
    and, at the closing checkpoint, by the time it would have held for the timetable.
    """
    first, last = section
    stops, projection = baseline.stops, baseline.projection
    budgets: dict[int, float] = {}
    absorbed = 0.0
    for i in range(last, first, -1):
        stop = stops[i]
        idle = projection.ready[i] - t_d - projection.arrivals[i]
        if stop.kind is StopKind.CHECKPOINT:
            if stop.scheduled_departure is None:
                hold = float("inf")
            else:
                hold = max(0.0, stop.scheduled_departure - projection.ready[i])
            absorbed = idle + hold
        else:
            absorbed += idle
        budgets[i] = absorbed
    return budgets


def _added_delay(stops: Sequence[RouteStop], option: MeetingPoint, kinematics: Kinematics) -> float:
    prev = stops[option.gap - 1].location
    if option.point == prev:
        return 0.0
    nxt = stops[option.gap].location
    return (
        kinematics.leg_time(prev, option.point)
        + kinematics.t_d
        + kinematics.leg_time(option.point, nxt)
        - kinematics.leg_time(prev, nxt)
    )


def _added_backtrack(stops: Sequence[RouteStop], option: MeetingPoint) -> float:
    prev = stops[option.gap - 1].location
    if option.point == prev:
        return 0.0
    follower = stops[option.gap]
    return (
        backward_km(prev, option.point, follower.direction)
        + backward_km(option.point, follower.location, follower.direction)
        - backward_km(prev, follower.location, follower.direction)
    )


def _may_fit(
    option: MeetingPoint,
    baseline: VehicleBaseline,
    budgets: dict[int, float],
    design: FlexDesign,
    kinematics: Kinematics,
) -> bool:
    if option.point == baseline.stops[option.gap - 1].location:
        return True
    if _added_delay(baseline.stops, option, kinematics) > budgets[option.gap] + EPS:
        return False
    return _added_backtrack(baseline.stops, option) <= design.zeta_b + EPS


def _pickup_in_time(
    option: MeetingPoint,
    baseline: VehicleBaseline,
    passenger: Passenger,
    now: float,
    design: FlexDesign,
    kinematics: Kinematics,
) -> bool:
    projection = baseline.projection
    prev = baseline.stops[option.gap - 1]
    if option.point == prev.location:
        earliest = projection.arrivals[option.gap - 1]
    else:
        earliest = projection.departures[option.gap - 1] + kinematics.leg_time(prev.location, option.point)
    pickup = max(earliest, now + option.walk)
    return pickup - (passenger.arrival_time + option.walk) <= design.zeta_w + EPS


##
# Search.
##


def _timetable_ok(baseline: VehicleBaseline, stops: Sequence[RouteStop], projection: Projection) -> bool:
    for stop, ready in zip(stops, projection.ready):
        if stop.kind is not StopKind.CHECKPOINT or stop.scheduled_departure is None:
            continue
        limit = max(stop.scheduled_departure, baseline.ready_by_uid.get(stop.uid, float("-inf")))
        if ready > limit + EPS:
            return False
    return True


def search_insertion(
    baseline: VehicleBaseline,
    passenger: Passenger,
    now: float,
    design: FlexDesign,
    scenario: ScenarioParams,
    kinematics: Kinematics,
    modes: frozenset[InsertionMode] = frozenset(InsertionMode),
    *,
    prefilter: bool = True,
    stats: FlexSearchStats | None = None,
) -> FlexCandidate | None:
    """Cheapest feasible insertion of ``passenger`` into one vehicle's plan.

    Args:
        baseline: The vehicle's committed plan and its projection.
        passenger: The request.
        now: Current clock; walking starts now.
        design: Flex design (``ζ_w``, ``ζ_b``, walking switch).
        scenario: Walking speed, ``ζ_a``, time weights and metric.
        kinematics: Movement constants.
        modes: ``DIRECT`` serves both ends at the passenger's own locations; ``WALK`` covers
            every combination where at least one end walks.
        prefilter: Drop meeting points that cannot fit the slack, backtracking or wait limits
            before any projection. The chosen candidate is the same either way.
        stats: Optional search counters.

    Returns:
        The candidate with the smallest weighted cost, ties broken by vehicle id and the
        pickup and drop-off positions; ``None`` if nothing is feasible.
    """
    stops = baseline.stops
    section = insertion_section(stops, passenger_direction(passenger), design.S_c)
    if section is None:
        return None
    walking = design.walking_enabled and InsertionMode.WALK in modes
    if not walking and InsertionMode.DIRECT not in modes:
        return None
    first, last = section
    pid = passenger.id
    o_options = meeting_points(stops, section, passenger.origin, walking, scenario)
    d_options = meeting_points(stops, section, passenger.destination, walking, scenario)
    if prefilter:
        budgets = gap_budgets(baseline, section, kinematics.t_d)
        o_options = [
            o
            for o in o_options
            if _may_fit(o, baseline, budgets, design, kinematics)
            and _pickup_in_time(o, baseline, passenger, now, design, kinematics)
        ]
        d_options = [d for d in d_options if _may_fit(d, baseline, budgets, design, kinematics)]
    if stats is not None:
        stats.pickup_options += len(o_options)
        stats.dropoff_options += len(d_options)

    gamma_v, gamma_w, gamma_a = scenario.gammas
    best: FlexCandidate | None = None
    for o in o_options:
        reach = now + o.walk
        with_pickup, o_index, o_merged = insert_point(
            stops, o.gap, o.point, pickup=pid, hold=reach if o.walking else None
        )
        shift = 0 if o_merged else 1
        choices = [(d.gap + shift, d) for d in d_options if d.gap > o.gap or (d.gap == o.gap and o_merged)]
        if not o_merged:
            fresh = _gap_points(with_pickup, o_index + 1, last + 1, passenger.destination, walking, scenario)
            choices.extend((d.gap, d) for d in fresh)
        for index, d in choices:
            mode = InsertionMode.WALK if (o.walking or d.walking) else InsertionMode.DIRECT
            if mode not in modes:
                continue
            candidate, d_index, _ = insert_point(with_pickup, index, d.point, dropoff=pid)
            if d_index == o_index:
                continue
            if stats is not None:
                stats.evaluated += 1
            projection = project_candidate(baseline, candidate, kinematics, pid, reach)
            if not projection.load_ok or projection.max_backtrack > design.zeta_b + EPS:
                continue
            if not _timetable_ok(baseline, candidate, projection):
                continue
            anchor = passenger.arrival_time + o.walk
            if not waits_within(projection, baseline.wait_anchor, design.zeta_w, pid, anchor):
                continue
            if stats is not None:
                stats.feasible += 1
            pickup, dropoff = projection.pickup_time[pid], projection.dropoff_time[pid]
            cost = existing_cost_delta(baseline.projection, projection, gamma_w, gamma_v)
            cost += gamma_w * (pickup - anchor) + gamma_v * (dropoff - pickup) + gamma_a * (o.walk + d.walk)
            option = FlexCandidate(
                baseline.vehicle_id,
                o_index,
                d_index,
                cost,
                candidate,
                mode,
                o.point,
                d.point,
                o.walk,
                d.walk,
                pickup,
                dropoff,
            )
            if best is None or option.key < best.key:
                best = option
    return best


def direct_insertion(
    baseline: VehicleBaseline,
    passenger: Passenger,
    now: float,
    design: FlexDesign,
    scenario: ScenarioParams,
    kinematics: Kinematics,
    **kwargs,
) -> FlexCandidate | None:
    """Best insertion serving the passenger at their own origin and destination."""
    return search_insertion(
        baseline, passenger, now, design, scenario, kinematics, frozenset({InsertionMode.DIRECT}), **kwargs
    )


def walking_insertion(
    baseline: VehicleBaseline,
    passenger: Passenger,
    now: float,
    design: FlexDesign,
    scenario: ScenarioParams,
    kinematics: Kinematics,
    **kwargs,
) -> FlexCandidate | None:
    """Best insertion where the passenger walks to, from, or both ends of the ride."""
    return search_insertion(
        baseline, passenger, now, design, scenario, kinematics, frozenset({InsertionMode.WALK}), **kwargs
    )
