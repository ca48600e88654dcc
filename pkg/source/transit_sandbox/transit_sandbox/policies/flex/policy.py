from __future__ import annotations

import logging

from transit_sandbox.core.geometry import EPS, Direction
from transit_sandbox.core.params import FlexDesign, ScenarioParams
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.plan import RouteStop
from transit_sandbox.engine.state import EngineState, PooledRequest
from transit_sandbox.engine.vehicle import Vehicle
from transit_sandbox.policies.base import Policy
from transit_sandbox.policies.flex.insertion import (
    FlexCandidate,
    FlexSearchStats,
    InsertionMode,
    passenger_direction,
    search_insertion,
)
from transit_sandbox.policies.flex.timetable import FlexTimetable, init_flex, segment_ledger
from transit_sandbox.policies.insertion import vehicle_baseline

logger = logging.getLogger(__name__)


class FlexRoutePolicy(Policy):
    """Checkpoint-based flexible route.

    Vehicles run the checkpoint timetable in both directions and deviate to virtual stops as
    long as the slack of the segment allows. In extended mode passengers may also walk up to
    ``ζ_a`` to and from the route. Requests that fit no vehicle are pooled and retried every
    ``retry_interval`` seconds until ``ζ_w`` after their arrival.
    """

    name = "flex"

    design: FlexDesign

    def __init__(self, design: FlexDesign, scenario: ScenarioParams, label: str | None = None):
        super().__init__(design, scenario, label)
        self.timetable = FlexTimetable.for_design(design, scenario)
        self.modes = frozenset(InsertionMode) if design.walking_enabled else frozenset({InsertionMode.DIRECT})
        self.prefilter = True

    def warmup_duration(self) -> float:
        return 2.0 * self.design.t_c

    def build_fleet(self) -> list[Vehicle]:
        fleet, self.timetable = init_flex(self.design, self.scenario)
        return fleet

    def _append_trip(self, vehicle: Vehicle):
        vehicle.plan.extend(self.timetable.trip_stops(vehicle.dispatch_time, vehicle.trips_planned))
        vehicle.trips_planned += 1

    """
    Engine hooks.
    """

    def dispatch(self, state: EngineState):
        for vehicle in state.vehicles:
            if not vehicle.dispatched and vehicle.dispatch_time is not None and vehicle.dispatch_time <= state.clock + EPS:
                vehicle.dispatched = True
                vehicle.direction = Direction.FORWARD
                self._append_trip(vehicle)
                self._append_trip(vehicle)
                state.log("dispatch", None, vehicle.id)

    def assign(self, state: EngineState, passenger: Passenger):
        if self._try_assign(state, passenger):
            return
        state.rejected_pool.append(PooledRequest(passenger.id, state.clock, state.clock))
        self.count("pooled")
        state.log("pool", passenger.id)

    def retry_pooled(self, state: EngineState):
        now = state.clock
        keep = []
        for entry in state.rejected_pool:
            passenger = state.passengers[entry.passenger_id]
            if now - passenger.arrival_time >= self.design.zeta_w - EPS:
                self.count("timed_out")
                state.reject(passenger, "timeout")
                continue
            if entry.pooled_at >= now - EPS or now - entry.last_attempt < self.design.retry_interval - EPS:
                keep.append(entry)
                continue
            self.count("retries")
            if self._try_assign(state, passenger):
                self.count("resurrected")
                continue
            entry.last_attempt = now
            keep.append(entry)
        state.rejected_pool = keep

    def begin_drain(self, state: EngineState):
        for entry in state.rejected_pool:
            state.reject(state.passengers[entry.passenger_id], "unassigned_at_close")
        state.rejected_pool = []

    def on_arrival(self, state: EngineState, vehicle: Vehicle, stop: RouteStop):
        if self.timetable.is_terminal(stop):
            vehicle.plan.compact()
            self._append_trip(vehicle)

    """
    Assignment.
    """

    def _try_assign(self, state: EngineState, passenger: Passenger) -> bool:
        now = state.clock
        best: FlexCandidate | None = None
        stats = FlexSearchStats()
        for vehicle in state.vehicles:
            if not vehicle.dispatched:
                continue
            baseline = vehicle_baseline(state, vehicle)
            candidate = search_insertion(
                baseline,
                passenger,
                now,
                self.design,
                self.scenario,
                self.kinematics,
                self.modes,
                prefilter=self.prefilter,
                stats=stats,
            )
            if candidate is not None and (best is None or candidate.key < best.key):
                best = candidate
        self.count("candidates_projected", stats.evaluated)
        if best is None:
            return False
        self._commit(state, passenger, best)
        return True

    def _commit(self, state: EngineState, passenger: Passenger, best: FlexCandidate):
        vehicle = state.vehicles[best.vehicle_id]
        vehicle.plan.replace_remaining(best.stops)
        passenger.direction = passenger_direction(passenger)
        passenger.assign(
            state.clock, vehicle.id, best.pickup_point, best.dropoff_point, best.access_walk, best.egress_walk
        )
        if passenger.reach_time > state.clock:
            state.schedule_reach(passenger)
        self.count(f"assigned_{best.mode.value}")
        state.log("assign_flex", passenger.id, vehicle.id, f"{best.k1},{best.k2},mode={best.mode.value}")
        if logger.isEnabledFor(logging.DEBUG):
            baseline = vehicle_baseline(state, vehicle)
            segments = segment_ledger(baseline.stops, baseline.projection, self.kinematics)
            tightest = min((s.slack_left for s in segments), default=float("nan"))
            logger.debug(
                "t=%.0f: passenger %d -> vehicle %d (%s, walk %.0f+%.0f s), cost %.1f, tightest slack %.0f s.",
                state.clock,
                passenger.id,
                vehicle.id,
                best.mode.value,
                best.access_walk,
                best.egress_walk,
                best.cost,
                tightest,
            )
