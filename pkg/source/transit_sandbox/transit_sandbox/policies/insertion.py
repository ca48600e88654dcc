"""Shared pieces of the pickup/drop-off insertion heuristics.

A vehicle's remaining plan is never reordered: a new request only adds (or merges) one pickup
and one drop-off. The leading stop is committed, so with ``m`` remaining stops the pickup goes
after stop ``p`` for ``p in 1..m`` and the drop-off anywhere after the pickup.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from transit_sandbox.core.geometry import EPS
from transit_sandbox.engine.plan import Kinematics, PlanAnchor, Projection, RouteStop, project
from transit_sandbox.engine.state import EngineState
from transit_sandbox.engine.vehicle import Vehicle


def candidate_count(n: int) -> int:
    """Number of (pickup, drop-off) insertions into a plan with ``n`` remaining stops."""
    if n < 0:
        raise ValueError("stop count must be non-negative")
    return 1 if n == 0 else n * (n + 1) // 2


@dataclass
class VehicleBaseline:
    """A vehicle's committed plan and its projection, computed once per request."""

    vehicle_id: int
    anchor: PlanAnchor
    stops: list[RouteStop]
    reach: dict[int, float]
    wait_anchor: dict[int, float]
    ride_start: dict[int, float]
    """Pickup time of passengers whose drop-off is planned but whose pickup is not."""
    projection: Projection
    ready_by_uid: dict[int, float]


def vehicle_baseline(state: EngineState, vehicle: Vehicle) -> VehicleBaseline:
    stops = vehicle.plan.remaining
    anchor = state.anchor(vehicle)
    reach = state.reach_times(vehicle)
    projection = project(anchor, stops, state.kinematics, reach)
    wait_anchor = {pid: state.passengers[pid].wait_anchor for pid in reach}
    ride_start = {}
    for stop in stops:
        for pid in stop.dropoffs:
            if pid not in reach:
                passenger = state.passengers[pid]
                if passenger.board_time is not None:
                    ride_start[pid] = passenger.board_time
                else:
                    arrived = vehicle.current_stop.planned_arrival if vehicle.current_stop is not None else state.clock
                    ride_start[pid] = max(arrived, passenger.reach_time)
    ready_by_uid = {stop.uid: ready for stop, ready in zip(stops, projection.ready)}
    return VehicleBaseline(vehicle.id, anchor, stops, reach, wait_anchor, ride_start, projection, ready_by_uid)


def project_candidate(
    baseline: VehicleBaseline, stops: list[RouteStop], kinematics: Kinematics, new_pid: int, new_reach: float
) -> Projection:
    reach = dict(baseline.reach)
    reach[new_pid] = new_reach
    return project(baseline.anchor, stops, kinematics, reach)


def waits_within(
    projection: Projection, wait_anchor: Mapping[int, float], zeta_w: float, new_pid: int, new_anchor: float
) -> bool:
    for pid, pickup in projection.pickup_time.items():
        anchor = new_anchor if pid == new_pid else wait_anchor[pid]
        if pickup - anchor > zeta_w + EPS:
            return False
    return True


def existing_cost_delta(base: Projection, new: Projection, gamma_w: float, gamma_v: float) -> float:
    """Weighted wait and ride increase of the passengers already on the plan."""
    total = 0.0
    for pid, base_drop in base.dropoff_time.items():
        new_drop = new.dropoff_time[pid]
        base_pick = base.pickup_time.get(pid)
        if base_pick is None:
            total += gamma_v * (new_drop - base_drop)
        else:
            new_pick = new.pickup_time[pid]
            total += gamma_w * (new_pick - base_pick) + gamma_v * ((new_drop - new_pick) - (base_drop - base_pick))
    return total


def pickup_positions(m: int) -> range:
    """Pickup insertion indices into a plan of ``m`` remaining stops."""
    return range(0, 1) if m == 0 else range(1, m + 1)
