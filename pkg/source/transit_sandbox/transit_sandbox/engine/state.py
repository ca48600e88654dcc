"""Mutable state of one simulation run and the raw result it leaves behind."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Any

from transit_sandbox.core.params import ScenarioParams, SystemDesign
from transit_sandbox.core.passenger import Passenger, PassengerState
from transit_sandbox.engine.plan import Kinematics, PlanAnchor
from transit_sandbox.engine.vehicle import Vehicle
from transit_sandbox.errors import SimulationError

EVENT_COLUMNS = ["t_s", "event", "passenger_id", "vehicle_id", "detail"]
TRACE_COLUMNS = ["t_s", "vehicle_id", "x_km", "y_km", "state", "onboard_count"]


@dataclass
class PooledRequest:
    """A flex request waiting for a retry."""

    passenger_id: int
    pooled_at: float
    last_attempt: float


@dataclass
class EngineState:
    """Everything the step loop and the policies share during a run."""

    scenario: ScenarioParams
    design: SystemDesign
    kinematics: Kinematics
    warmup: float
    clock: float = 0.0
    vehicles: list[Vehicle] = field(default_factory=list)
    passengers: dict[int, Passenger] = field(default_factory=dict)
    pending_requests: deque[Passenger] = field(default_factory=deque)
    rejected_pool: list[PooledRequest] = field(default_factory=list)
    events: list[tuple] = field(default_factory=list)
    trace: list[tuple] | None = None
    active: set[int] = field(default_factory=set)
    released: int = 0
    served: int = 0
    rejected: int = 0
    draining: bool = False
    _walkers: list[tuple[float, int]] = field(default_factory=list)
    _egressers: list[tuple[float, int]] = field(default_factory=list)

    @property
    def window_start(self) -> float:
        return self.warmup

    @property
    def window_end(self) -> float:
        return self.warmup + self.scenario.sim_length

    def log(
        self,
        event: str,
        passenger_id: int | None = None,
        vehicle_id: int | None = None,
        detail: str = "",
        t: float | None = None,
    ):
        self.events.append((self.clock if t is None else t, event, passenger_id, vehicle_id, detail))

    """
    Passenger bookkeeping.
    """

    def release(self, passenger: Passenger):
        self.passengers[passenger.id] = passenger
        self.active.add(passenger.id)
        self.released += 1
        self.log("request", passenger.id, t=passenger.arrival_time)

    def finalize(self, passenger: Passenger):
        """Account for a passenger that reached Served or Rejected."""
        self.active.discard(passenger.id)
        if passenger.state is PassengerState.SERVED:
            self.served += 1
            self.log("served", passenger.id, passenger.assigned_vehicle, t=passenger.done_time)
        else:
            self.rejected += 1
            self.log("reject", passenger.id, None, passenger.reject_reason or "", t=passenger.rejection_time)

    def reject(self, passenger: Passenger, reason: str):
        passenger.reject(self.clock, reason)
        self.finalize(passenger)

    def schedule_reach(self, passenger: Passenger):
        heapq.heappush(self._walkers, (passenger.reach_time, passenger.id))

    def schedule_egress(self, passenger: Passenger):
        heapq.heappush(self._egressers, (passenger.alight_time + passenger.egress_walk, passenger.id))

    def pop_reached(self, until: float) -> list[tuple[float, Passenger]]:
        out = []
        while self._walkers and self._walkers[0][0] <= until + 1e-9:
            when, pid = heapq.heappop(self._walkers)
            out.append((when, self.passengers[pid]))
        return out

    def pop_egressed(self, until: float) -> list[tuple[float, Passenger]]:
        out = []
        while self._egressers and self._egressers[0][0] <= until + 1e-9:
            when, pid = heapq.heappop(self._egressers)
            out.append((when, self.passengers[pid]))
        return out

    def check_conservation(self):
        if self.released != self.served + self.rejected + len(self.active):
            raise SimulationError(
                f"t={self.clock}: passenger conservation broken: released={self.released} "
                f"served={self.served} rejected={self.rejected} in_progress={len(self.active)}"
            )

    """
    Projection helpers.
    """

    def anchor(self, vehicle: Vehicle) -> PlanAnchor:
        waiting_here = 0
        stop = vehicle.current_stop
        if stop is not None:
            waiting_here = sum(
                1
                for pid in stop.pickups
                if self.passengers[pid].state in (PassengerState.WALKING_TO_STOP, PassengerState.WAITING_AT_STOP)
            )
        return vehicle.anchor(self.clock, waiting_here)

    def reach_times(self, vehicle: Vehicle) -> dict[int, float]:
        """Earliest boarding time of the passengers still to be picked up by ``vehicle``."""
        return {pid: self.passengers[pid].reach_time for stop in vehicle.plan.remaining for pid in stop.pickups}


@dataclass
class RunResult:
    """Raw outcome of a run, input to the metrics layer."""

    scenario: ScenarioParams
    design: SystemDesign
    policy: str
    warmup: float
    end_clock: float
    passengers: list[Passenger]
    vehicles: list[Vehicle]
    events: list[tuple]
    trace: list[tuple] | None
    demand_fingerprint: str
    counters: dict[str, Any] = field(default_factory=dict)

    @property
    def design_id(self) -> str:
        return self.design.design_id

    @property
    def seed(self) -> int:
        return self.scenario.seed
