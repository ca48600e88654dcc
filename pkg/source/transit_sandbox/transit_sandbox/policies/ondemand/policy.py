from __future__ import annotations

import logging

from transit_sandbox.core.geometry import distance
from transit_sandbox.core.params import OnDemandDesign, ScenarioParams
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.state import EngineState
from transit_sandbox.engine.vehicle import Vehicle
from transit_sandbox.errors import SimulationError
from transit_sandbox.policies.base import Policy
from transit_sandbox.policies.fixed.layout import line_positions
from transit_sandbox.policies.insertion import candidate_count, vehicle_baseline
from transit_sandbox.policies.ondemand.insertion import InsertionStats, OnDemandCandidate, insert_ondemand

logger = logging.getLogger(__name__)


class OnDemandPolicy(Policy):
    """Door-to-door service from depots spread along the route axis.

    Every request is inserted into the plan of the vehicle with the smallest feasible increment
    when it arrives; requests no vehicle can take are rejected on the spot. Vehicles that run
    out of work stay where they are.
    """

    name = "ondemand"

    design: OnDemandDesign

    def __init__(self, design: OnDemandDesign, scenario: ScenarioParams, label: str | None = None):
        super().__init__(design, scenario, label)
        self.depots = line_positions(design.S_d, scenario.L, scenario.W)
        self.direct_rides: dict[int, float] = {}
        self.prefilter = True

    def warmup_duration(self) -> float:
        return 0.0

    def build_fleet(self) -> list[Vehicle]:
        fleet = []
        for depot, count in zip(self.depots, self.design.mu_s):
            for _ in range(count):
                vehicle = Vehicle(len(fleet), self.design.K, self.scenario.v_o, depot, home=depot)
                vehicle.dispatch_time = 0.0
                vehicle.dispatched = True
                fleet.append(vehicle)
        logger.info(
            "Design '%s': %d vehicles at %d depots %s.", self.design.design_id, len(fleet), self.design.S_d, self.design.mu_s
        )
        return fleet

    def assign(self, state: EngineState, passenger: Passenger):
        now = state.clock
        self.direct_rides[passenger.id] = self.scenario.direct_ride_time(
            distance(passenger.origin, passenger.destination, self.scenario.metric)
        )
        best: OnDemandCandidate | None = None
        for vehicle in state.vehicles:
            baseline = vehicle_baseline(state, vehicle)
            stats = InsertionStats()
            candidate = insert_ondemand(
                baseline,
                passenger,
                now,
                self.design,
                self.kinematics,
                self.direct_rides,
                gamma_w=self.scenario.gamma_w,
                gamma_v=self.scenario.gamma_v,
                prefilter=self.prefilter,
                stats=stats,
            )
            expected = candidate_count(len(baseline.stops))
            if stats.enumerated != expected:
                raise SimulationError(
                    f"vehicle {vehicle.id}: enumerated {stats.enumerated} insertions, expected {expected}"
                )
            self.count("candidates_enumerated", stats.enumerated)
            self.count("candidates_expected", expected)
            self.count("candidates_projected", stats.evaluated)
            if candidate is not None and (best is None or candidate.key < best.key):
                best = candidate

        if best is None:
            logger.debug("t=%.0f: passenger %d rejected, no feasible insertion.", now, passenger.id)
            self.count("rejected")
            state.reject(passenger, "infeasible")
            return
        vehicle = state.vehicles[best.vehicle_id]
        vehicle.plan.replace_remaining(best.stops)
        passenger.assign(now, vehicle.id, passenger.origin, passenger.destination)
        self.count("assigned")
        state.log("assign_od", passenger.id, vehicle.id, f"{best.k1},{best.k2},{best.increment:.3f}")
        logger.debug(
            "t=%.0f: passenger %d -> vehicle %d at (%d, %d), increment %.1f s.",
            now,
            passenger.id,
            vehicle.id,
            best.k1,
            best.k2,
            best.increment,
        )
