"""Passenger records and their timing ledger."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from transit_sandbox.core.geometry import Direction, Point
from transit_sandbox.errors import SimulationError


class PassengerState(str, Enum):
    """Lifecycle of a trip request, in transition order."""

    UNASSIGNED = "unassigned"
    WALKING_TO_STOP = "walking_to_stop"
    WAITING_AT_STOP = "waiting_at_stop"
    ONBOARD = "onboard"
    EGRESSING = "egressing"
    SERVED = "served"
    REJECTED = "rejected"


_ORDER = {state: index for index, state in enumerate(PassengerState)}
TERMINAL_STATES = frozenset({PassengerState.SERVED, PassengerState.REJECTED})


@dataclass(eq=False)
class Passenger:
    """A trip request and everything that happens to it.

    ``arrival_time`` is on the simulation clock. Demand files carry times relative to the demand
    window; the engine shifts them by the design's warm-up when it loads the demand.
    """

    id: int
    arrival_time: float
    origin: Point
    destination: Point
    state: PassengerState = PassengerState.UNASSIGNED
    boarding_stop: Point | None = None
    alighting_stop: Point | None = None
    t_access: float = 0.0
    t_wait: float = 0.0
    t_invehicle: float = 0.0
    t_egress: float = 0.0
    assigned_vehicle: int | None = None
    rejection_time: float | None = None
    reject_reason: str | None = None
    direction: Direction | None = None
    access_walk: float = 0.0
    """Planned access walk (s, on the time grid)."""
    egress_walk: float = 0.0
    """Planned egress walk (s, on the time grid)."""
    assign_time: float | None = None
    reach_time: float | None = None
    board_time: float | None = None
    alight_time: float | None = None
    done_time: float | None = None

    def clone(self, time_offset: float = 0.0) -> Passenger:
        """Fresh unassigned copy, optionally shifted in time."""
        return Passenger(self.id, self.arrival_time + time_offset, self.origin, self.destination)

    @property
    def wait_anchor(self) -> float:
        """Clock time from which waiting is counted against ζ_w."""
        return self.arrival_time + self.access_walk

    @property
    def is_active(self) -> bool:
        return self.state not in TERMINAL_STATES

    """
    Transitions.
    """

    def _transition(self, new_state: PassengerState, now: float):
        if new_state is PassengerState.REJECTED:
            allowed = self.state is PassengerState.UNASSIGNED
        else:
            allowed = self.state is not PassengerState.REJECTED and _ORDER[new_state] > _ORDER[self.state]
        if not allowed:
            raise SimulationError(
                f"passenger {self.id}: illegal transition {self.state.value} -> {new_state.value} at t={now}"
            )
        self.state = new_state

    def assign(
        self,
        now: float,
        vehicle_id: int | None,
        boarding_stop: Point,
        alighting_stop: Point,
        access_walk: float = 0.0,
        egress_walk: float = 0.0,
    ):
        """Commit the passenger to a boarding point; they start walking there at ``now``."""
        self.assigned_vehicle = vehicle_id
        self.boarding_stop = boarding_stop
        self.alighting_stop = alighting_stop
        self.access_walk = access_walk
        self.egress_walk = egress_walk
        self.assign_time = now
        self.reach_time = now + access_walk
        # pooled time before assignment counts as waiting
        self.t_wait += now - self.arrival_time
        if access_walk > 0:
            self._transition(PassengerState.WALKING_TO_STOP, now)
        else:
            self.reach(now)

    def reach(self, now: float):
        self._transition(PassengerState.WAITING_AT_STOP, now)
        self.t_access += now - self.assign_time
        self.reach_time = now

    def board(self, now: float, vehicle_id: int):
        self._transition(PassengerState.ONBOARD, now)
        self.assigned_vehicle = vehicle_id
        self.board_time = now
        self.t_wait += now - self.reach_time

    def alight(self, now: float):
        self._transition(PassengerState.EGRESSING, now)
        self.alight_time = now
        self.t_invehicle += now - self.board_time
        if self.egress_walk <= 0:
            self.finish(now)

    def finish(self, now: float):
        self._transition(PassengerState.SERVED, now)
        self.done_time = now
        self.t_egress += now - self.alight_time

    def reject(self, now: float, reason: str):
        self._transition(PassengerState.REJECTED, now)
        self.rejection_time = now
        self.reject_reason = reason
