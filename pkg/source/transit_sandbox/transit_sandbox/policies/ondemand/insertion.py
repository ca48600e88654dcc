from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

from transit_sandbox.core.geometry import EPS
from transit_sandbox.core.params import InsertionObjective, OnDemandDesign
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.plan import Kinematics, RouteStop, insert_point
from transit_sandbox.policies.insertion import (
    VehicleBaseline,
    existing_cost_delta,
    pickup_positions,
    project_candidate,
    waits_within,
)


@dataclass(frozen=True)
class OnDemandCandidate:
    vehicle_id: int
    k1: int
    k2: int
    increment: float
    stops: list[RouteStop]
    pickup_time: float
    dropoff_time: float

    @property
    def key(self) -> tuple:
        return (self.increment, self.vehicle_id, self.k1, self.k2)


@dataclass
class InsertionStats:
    enumerated: int = 0
    evaluated: int = 0


def insert_ondemand(
    baseline: VehicleBaseline,
    passenger: Passenger,
    now: float,
    design: OnDemandDesign,
    kinematics: Kinematics,
    direct_rides: Mapping[int, float],
    *,
    gamma_w: float = 1.0,
    gamma_v: float = 1.0,
    prefilter: bool = True,
    stats: InsertionStats | None = None,
) -> OnDemandCandidate | None:
    """Best feasible insertion of ``passenger`` into one vehicle's plan.

    Every (pickup, drop-off) position pair is enumerated. A candidate is feasible when the load
    never exceeds ``K``, every pickup happens within ``ζ_w`` of the request and every ride stays
    within ``ζ_d`` times its direct ride. With ``prefilter`` the pairs of a pickup position whose
    pickup alone already misses ``ζ_w`` are skipped without projection; the result is the same.

    Args:
        baseline: The vehicle's committed plan and its projection.
        passenger: The request (door-to-door, no walking).
        now: Current clock.
        design: On-demand design (``K`` is in the baseline anchor).
        kinematics: Movement constants.
        direct_rides: Direct ride time (s) of every passenger on the plan and of ``passenger``.
        gamma_w: Wait weight of the weighted-passenger-time objective.
        gamma_v: In-vehicle weight of the weighted-passenger-time objective.
        prefilter: Skip pickup positions that cannot meet the wait limit.
        stats: Optional counters of enumerated and projected candidates.

    Returns:
        The minimum candidate by (increment, vehicle id, k1, k2), or ``None`` if none is feasible.
    """
    pid = passenger.id
    origin, destination = passenger.origin, passenger.destination
    stops = baseline.stops
    base = baseline.projection
    anchor = baseline.anchor
    best: OnDemandCandidate | None = None
    for p in pickup_positions(len(stops)):
        with_pickup, o_index, merged = insert_point(stops, p, origin, pickup=pid)
        drop_positions = range(o_index + 1, len(with_pickup) + 1)
        if stats is not None:
            stats.enumerated += len(drop_positions)
        if prefilter:
            if merged:
                earliest = base.arrivals[p - 1]
            elif p == 0:
                earliest = anchor.ready_time + kinematics.leg_time(anchor.position, origin)
            else:
                earliest = base.departures[p - 1] + kinematics.leg_time(stops[p - 1].location, origin)
            if max(earliest, now) - passenger.arrival_time > design.zeta_w + EPS:
                continue
        for q in drop_positions:
            candidate, d_index, _ = insert_point(with_pickup, q, destination, dropoff=pid)
            if d_index == o_index:
                continue
            if stats is not None:
                stats.evaluated += 1
            projection = project_candidate(baseline, candidate, kinematics, pid, now)
            if not projection.load_ok:
                continue
            if not waits_within(projection, baseline.wait_anchor, design.zeta_w, pid, passenger.arrival_time):
                continue
            if not _rides_within(projection, baseline.ride_start, direct_rides, design.zeta_d):
                continue
            pickup, dropoff = projection.pickup_time[pid], projection.dropoff_time[pid]
            if design.objective is InsertionObjective.VEHICLE_TIME:
                increment = projection.end_time - base.end_time
            else:
                increment = existing_cost_delta(base, projection, gamma_w, gamma_v)
                increment += gamma_w * (pickup - passenger.arrival_time) + gamma_v * (dropoff - pickup)
            option = OnDemandCandidate(baseline.vehicle_id, p, q, increment, candidate, pickup, dropoff)
            if best is None or option.key < best.key:
                best = option
    return best


def _rides_within(projection, ride_start: Mapping[int, float], direct_rides: Mapping[int, float], zeta_d: float) -> bool:
    for pid, dropoff in projection.dropoff_time.items():
        start = projection.pickup_time.get(pid)
        if start is None:
            start = ride_start[pid]
        if dropoff - start > zeta_d * direct_rides[pid] + EPS:
            return False
    return True
