from __future__ import annotations

import logging
from collections import defaultdict

from transit_sandbox.core.geometry import EPS, Direction, walk_time
from transit_sandbox.core.params import FixedDesign, ScenarioParams, ceil_step
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.plan import RouteStop, StopKind
from transit_sandbox.engine.state import EngineState
from transit_sandbox.engine.vehicle import Vehicle
from transit_sandbox.errors import DegenerateTripError
from transit_sandbox.policies.base import Policy, dispatch_times
from transit_sandbox.policies.fixed.layout import FixedLayout, assign_fixed

logger = logging.getLogger(__name__)


class FixedRoutePolicy(Policy):
    """Vehicles shuttle between the terminals and stop at every stop.

    Passengers walk to the nearest stop and board the first vehicle heading their way with room.
    Nobody is rejected except trips whose ends share a stop.
    """

    name = "fixed"
    strict_capacity = False

    design: FixedDesign

    def __init__(self, design: FixedDesign, scenario: ScenarioParams, label: str | None = None):
        super().__init__(design, scenario, label)
        self.layout = FixedLayout.for_design(design, scenario)
        # (stop index, direction) -> waiting passenger ids
        self._queues: dict[tuple[int, Direction], list[int]] = defaultdict(list)
        self._alight_index: dict[int, int] = {}
        self._board_index: dict[int, int] = {}

    def warmup_duration(self) -> float:
        return 2.0 * self.design.t_c

    def build_fleet(self) -> list[Vehicle]:
        times = dispatch_times(self.design.t_c, self.design.headway, self.design.V, self.scenario.time_step)
        terminal = self.layout.stop_positions[0]
        fleet = []
        for vid in range(self.design.V):
            vehicle = Vehicle(vid, self.design.K, self.scenario.v_o, terminal, home=terminal)
            vehicle.dispatch_time = times[vid] if vid < len(times) else None
            fleet.append(vehicle)
        if len(times) < self.design.V:
            logger.warning(
                "Design '%s': %d of %d vehicles cover frequency %.2f/h; %d stay in reserve.",
                self.design.design_id,
                len(times),
                self.design.V,
                self.design.f,
                self.design.V - len(times),
            )
        return fleet

    def trip_stops(self, direction: Direction, skip_first: bool = False) -> list[RouteStop]:
        indices = list(range(len(self.layout)))
        if direction is Direction.BACKWARD:
            indices.reverse()
        if skip_first:
            indices = indices[1:]
        return [
            RouteStop(self.layout.stop_positions[i], StopKind.FIXED_STOP, direction=direction, stop_index=i)
            for i in indices
        ]

    """
    Engine hooks.
    """

    def dispatch(self, state: EngineState):
        for vehicle in state.vehicles:
            if not vehicle.dispatched and vehicle.dispatch_time is not None and vehicle.dispatch_time <= state.clock + EPS:
                vehicle.dispatched = True
                vehicle.direction = Direction.FORWARD
                vehicle.plan.extend(self.trip_stops(Direction.FORWARD))
                state.log("dispatch", None, vehicle.id)

    def assign(self, state: EngineState, passenger: Passenger):
        try:
            trip = assign_fixed(passenger, self.layout, self.scenario.metric)
        except DegenerateTripError as exc:
            logger.warning("%s; rejected as not a transit trip.", exc)
            state.reject(passenger, "same_stop")
            return
        board_at = self.layout.stop_positions[trip.boarding_index]
        alight_at = self.layout.stop_positions[trip.alighting_index]
        dt = self.scenario.time_step
        access = ceil_step(walk_time(passenger.origin, board_at, self.scenario.v_w, self.scenario.metric), dt)
        egress = ceil_step(walk_time(alight_at, passenger.destination, self.scenario.v_w, self.scenario.metric), dt)
        passenger.direction = trip.direction
        self._board_index[passenger.id] = trip.boarding_index
        self._alight_index[passenger.id] = trip.alighting_index
        passenger.assign(state.clock, None, board_at, alight_at, access, egress)
        state.log("assign_fixed", passenger.id, None, f"{trip.boarding_index}->{trip.alighting_index}")
        if passenger.reach_time > state.clock:
            state.schedule_reach(passenger)
        else:
            self.on_reach(state, passenger)

    def on_reach(self, state: EngineState, passenger: Passenger):
        self._queues[(self._board_index[passenger.id], passenger.direction)].append(passenger.id)

    def on_arrival(self, state: EngineState, vehicle: Vehicle, stop: RouteStop):
        if vehicle.plan.next_stop is None:
            # terminal: turn around
            vehicle.plan.compact()
            vehicle.direction = stop.direction.reverse
            vehicle.plan.extend(self.trip_stops(vehicle.direction, skip_first=True))

    def boarding_candidates(self, state: EngineState, vehicle: Vehicle, stop: RouteStop) -> list[Passenger]:
        queue = self._queues.get((stop.stop_index, vehicle.direction))
        if not queue:
            return []
        waiting = [state.passengers[pid] for pid in queue]
        waiting.sort(key=lambda p: (p.reach_time, p.id))
        return waiting

    def on_board(self, state: EngineState, vehicle: Vehicle, stop: RouteStop, passenger: Passenger):
        self._queues[(stop.stop_index, vehicle.direction)].remove(passenger.id)
        target = self._alight_index[passenger.id]
        stops = vehicle.plan.stops
        for index in range(vehicle.plan.cursor, len(stops)):
            if stops[index].stop_index == target:
                stops[index] = stops[index].merged(dropoff=passenger.id)
                return
        raise AssertionError(f"stop {target} not ahead of vehicle {vehicle.id}")
