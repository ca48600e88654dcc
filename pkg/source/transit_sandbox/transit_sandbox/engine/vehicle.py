from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from transit_sandbox.core.geometry import Direction, Point
from transit_sandbox.engine.plan import PlanAnchor, RoutePlan, RouteStop, StopKind


class KinematicState(str, Enum):
    IDLE = "idle"
    MOVING = "moving"
    DWELLING = "dwelling"


@dataclass(eq=False)
class Vehicle:
    """A vehicle and its committed plan.

    ``section_backtrack_km`` is the backward travel driven since the last checkpoint departure;
    ``peak_backtrack_km`` is its largest value over the run.
    ``window_km`` only accrues inside the measurement window; ``odometer_km`` covers the whole run
    and ``leg_km`` lists the length of every executed leg.
    """

    id: int
    capacity: int
    speed: float
    position: Point
    direction: Direction | None = None
    kinematic_state: KinematicState = KinematicState.IDLE
    dwell_remaining: float = 0.0
    onboard: set[int] = field(default_factory=set)
    plan: RoutePlan = field(default_factory=RoutePlan)
    dispatch_time: float | None = None
    dispatched: bool = False
    home: Point | None = None
    current_stop: RouteStop | None = None
    leg_target: RouteStop | None = None
    leg_steps_remaining: int = 0
    leg_arrival: float | None = None
    section_backtrack_km: float = 0.0
    peak_backtrack_km: float = 0.0
    odometer_km: float = 0.0
    window_km: float = 0.0
    leg_km: list[float] = field(default_factory=list)
    trips_planned: int = 0

    def anchor(self, now: float, waiting_here: int = 0) -> PlanAnchor:
        """Starting point for projecting the remaining plan at ``now``.

        Args:
            now: Current clock.
            waiting_here: Passengers assigned to the stop the vehicle dwells at who have not boarded yet.
        """
        load = len(self.onboard) + waiting_here
        if self.kinematic_state is KinematicState.MOVING:
            return PlanAnchor(
                position=self.position,
                ready_time=now,
                load=load,
                capacity=self.capacity,
                first_arrival=self.leg_arrival,
                section_backtrack=self.section_backtrack_km,
            )
        ready = now + self.dwell_remaining if self.kinematic_state is KinematicState.DWELLING else now
        backtrack = self.section_backtrack_km
        if self.current_stop is not None and self.current_stop.kind is StopKind.CHECKPOINT:
            backtrack = 0.0
        return PlanAnchor(
            position=self.position, ready_time=ready, load=load, capacity=self.capacity, section_backtrack=backtrack
        )
