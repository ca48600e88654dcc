from __future__ import annotations

import abc
import math
from typing import TYPE_CHECKING, ClassVar

from transit_sandbox.core.geometry import EPS
from transit_sandbox.core.params import ceil_step
from transit_sandbox.core.passenger import Passenger, PassengerState
from transit_sandbox.engine.plan import Kinematics, RouteStop

if TYPE_CHECKING:
    from transit_sandbox.core.params import ScenarioParams, SystemDesign
    from transit_sandbox.engine.state import EngineState
    from transit_sandbox.engine.vehicle import Vehicle


def dispatch_times(t_c: float, headway: float, fleet: int, time_step: float) -> list[float]:
    """Dispatch times of the vehicles put into service, one headway apart.

    Only vehicles leaving within one round trip (``2 t_c``) are needed to keep the frequency;
    the rest of the fleet stays in reserve.
    """
    needed = max(1, math.ceil(2.0 * t_c / headway - EPS))
    return [ceil_step(i * headway, time_step) for i in range(min(fleet, needed))]


class Policy(abc.ABC):
    """Operating policy plugged into the step loop.

    The engine owns motion, dwell and the passenger ledger; a policy decides who is served by
    which vehicle and what the vehicles' plans look like. Hooks are called in step order:
    :meth:`dispatch`, :meth:`assign` for every new request, :meth:`retry_pooled`, then the
    per-vehicle hooks as vehicles arrive and board.
    """

    name: ClassVar[str]
    strict_capacity: ClassVar[bool] = True
    """Whether a full vehicle at boarding time is an engine bug (assigned service)."""

    def __init__(self, design: SystemDesign, scenario: ScenarioParams, label: str | None = None):
        self.design = design
        self.label = label or self.name
        self.scenario = scenario
        self.kinematics = Kinematics(scenario.v_o, scenario.time_step, design.t_d, scenario.metric)
        self.counters: dict[str, int] = {}

    @abc.abstractmethod
    def build_fleet(self) -> list[Vehicle]:
        """Create the vehicles at their initial positions."""

    @abc.abstractmethod
    def warmup_duration(self) -> float:
        """Time before the demand window opens (s)."""

    @abc.abstractmethod
    def assign(self, state: EngineState, passenger: Passenger):
        """Handle a new request at ``state.clock``."""

    def dispatch(self, state: EngineState):
        """Put vehicles due at ``state.clock`` into service."""

    def retry_pooled(self, state: EngineState):
        """Re-evaluate pooled requests."""

    def begin_drain(self, state: EngineState):
        """Called once when the demand window closes."""

    def on_reach(self, state: EngineState, passenger: Passenger):
        """A passenger reached their boarding point."""

    def on_arrival(self, state: EngineState, vehicle: Vehicle, stop: RouteStop):
        """A vehicle reached ``stop``; alighting is done, boarding is next."""

    def on_board(self, state: EngineState, vehicle: Vehicle, stop: RouteStop, passenger: Passenger):
        """A passenger boarded ``vehicle`` at ``stop``."""

    def boarding_candidates(self, state: EngineState, vehicle: Vehicle, stop: RouteStop) -> list[Passenger]:
        """Passengers allowed to board ``vehicle`` at ``stop``, in boarding order."""
        waiting = [
            state.passengers[pid]
            for pid in stop.pickups
            if state.passengers[pid].state is PassengerState.WAITING_AT_STOP
            and state.passengers[pid].assigned_vehicle == vehicle.id
        ]
        waiting.sort(key=lambda p: (p.reach_time, p.id))
        return waiting

    def count(self, key: str, amount: int = 1):
        self.counters[key] = self.counters.get(key, 0) + amount
