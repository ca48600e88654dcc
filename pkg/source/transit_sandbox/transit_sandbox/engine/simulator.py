"""Discrete-time step loop shared by all operating policies.

Order of work inside a step starting at clock ``t`` (ending at ``t + Δt``):

1. the policy dispatches vehicles due at ``t`` (they reach their first stop at ``t``);
2. requests arriving at ``t`` are handed to the policy;
3. pooled requests are retried;
4. idle vehicles with a non-empty plan start driving;
5. walkers reaching their stop and egressing passengers finishing by ``t + Δt`` are processed;
6. vehicles dwell (boarding late walkers) or drive one step, in id order;
7. the clock advances and the trace row is written.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Sequence
from typing import TYPE_CHECKING

from transit_sandbox.core.demand import demand_fingerprint
from transit_sandbox.core.geometry import EPS, backward_km, distance, move_toward
from transit_sandbox.core.params import FixedDesign, FlexDesign, ScenarioParams, SystemDesign
from transit_sandbox.core.passenger import Passenger, PassengerState
from transit_sandbox.engine.plan import RouteStop, StopKind, stop_departure
from transit_sandbox.engine.state import EngineState, RunResult
from transit_sandbox.engine.vehicle import KinematicState, Vehicle
from transit_sandbox.errors import SimulationError
from transit_sandbox.policies import make_policy

if TYPE_CHECKING:
    from transit_sandbox.metrics.report import RunReport
    from transit_sandbox.policies.base import Policy

logger = logging.getLogger(__name__)

DEFAULT_DRAIN_LIMIT = 4 * 3600.0
_MAX_CHAINED_STOPS = 10_000


def warmup_duration(design: SystemDesign) -> float:
    """Warm-up before the demand window: two one-way cycles for line services, none on demand."""
    if isinstance(design, (FixedDesign, FlexDesign)):
        return 2.0 * design.t_c
    return 0.0


##
# Vehicle motion.
##


def _alight_and_board(state: EngineState, policy: Policy, vehicle: Vehicle, stop: RouteStop, now: float):
    for pid in sorted(stop.dropoffs & vehicle.onboard):
        passenger = state.passengers[pid]
        vehicle.onboard.remove(pid)
        passenger.alight(now)
        state.log("alight", pid, vehicle.id, t=now)
        if passenger.state is PassengerState.SERVED:
            state.finalize(passenger)
        else:
            state.schedule_egress(passenger)
    policy.on_arrival(state, vehicle, stop)
    _board(state, policy, vehicle, stop, now)


def _board(state: EngineState, policy: Policy, vehicle: Vehicle, stop: RouteStop, now: float):
    for passenger in policy.boarding_candidates(state, vehicle, stop):
        if len(vehicle.onboard) >= vehicle.capacity:
            if policy.strict_capacity:
                raise SimulationError(
                    f"t={now}: vehicle {vehicle.id} full ({vehicle.capacity}) when boarding assigned passenger {passenger.id}"
                )
            break
        passenger.board(now, vehicle.id)
        vehicle.onboard.add(passenger.id)
        state.log("board", passenger.id, vehicle.id, t=now)
        policy.on_board(state, vehicle, stop, passenger)


def _arrive(state: EngineState, policy: Policy, vehicle: Vehicle, now: float) -> bool:
    """Process an arrival at the leading stop. Returns whether the vehicle leaves immediately."""
    stop = vehicle.plan.advance()
    vehicle.position = stop.location
    vehicle.current_stop = stop
    vehicle.leg_target = None
    vehicle.leg_arrival = None
    stop.planned_arrival = now
    state.log("arrive", None, vehicle.id, f"{stop.kind.value}:{stop.stop_index if stop.stop_index is not None else ''}", t=now)
    _alight_and_board(state, policy, vehicle, stop, now)
    vehicle.dwell_remaining = stop_departure(stop, now, policy.kinematics.t_d) - now
    if vehicle.dwell_remaining > EPS:
        vehicle.kinematic_state = KinematicState.DWELLING
        return False
    vehicle.dwell_remaining = 0.0
    return True


def depart(state: EngineState, policy: Policy, vehicle: Vehicle, now: float):
    """Leave the current stop (if any) toward the next planned stop."""
    kinematics = policy.kinematics
    for _ in range(_MAX_CHAINED_STOPS):
        stop = vehicle.current_stop
        if stop is not None and stop.scheduled_departure is not None:
            state.log("depart", None, vehicle.id, f"{stop.stop_index},{now - stop.scheduled_departure:.3f}", t=now)
        if stop is not None and stop.kind is StopKind.CHECKPOINT:
            vehicle.section_backtrack_km = 0.0
        vehicle.current_stop = None
        vehicle.dwell_remaining = 0.0
        target = vehicle.plan.next_stop
        if target is None:
            vehicle.kinematic_state = KinematicState.IDLE
            vehicle.plan.compact()
            return
        leg = distance(vehicle.position, target.location, kinematics.metric)
        if target.direction is not None:
            vehicle.section_backtrack_km += backward_km(vehicle.position, target.location, target.direction)
            vehicle.peak_backtrack_km = max(vehicle.peak_backtrack_km, vehicle.section_backtrack_km)
            vehicle.direction = target.direction
        vehicle.leg_km.append(leg)
        steps = kinematics.leg_steps(vehicle.position, target.location)
        vehicle.leg_target = target
        vehicle.leg_steps_remaining = steps
        vehicle.leg_arrival = now + steps * kinematics.time_step
        if steps > 0:
            vehicle.kinematic_state = KinematicState.MOVING
            return
        if not _arrive(state, policy, vehicle, now):
            return
    raise SimulationError(f"t={now}: vehicle {vehicle.id} chained more than {_MAX_CHAINED_STOPS} zero-length stops")


def _drive(state: EngineState, policy: Policy, vehicle: Vehicle, t: float, t_next: float):
    kinematics = policy.kinematics
    target = vehicle.leg_target
    vehicle.leg_steps_remaining -= 1
    if vehicle.leg_steps_remaining <= 0:
        new_position = target.location
    else:
        new_position = move_toward(vehicle.position, target.location, kinematics.step_km, kinematics.metric)
    moved = distance(vehicle.position, new_position, kinematics.metric)
    vehicle.odometer_km += moved
    if state.window_start <= t < state.window_end:
        vehicle.window_km += moved
    vehicle.position = new_position
    if vehicle.leg_steps_remaining <= 0 and _arrive(state, policy, vehicle, t_next):
        depart(state, policy, vehicle, t_next)


##
# Step loop.
##


def step(state: EngineState, policy: Policy) -> EngineState:
    """Advance the run by one time step."""
    t = state.clock
    dt = state.scenario.time_step
    t_next = t + dt

    policy.dispatch(state)
    while state.pending_requests and state.pending_requests[0].arrival_time <= t + EPS:
        passenger = state.pending_requests.popleft()
        state.release(passenger)
        policy.assign(state, passenger)
    policy.retry_pooled(state)
    for vehicle in state.vehicles:
        if vehicle.dispatched and vehicle.kinematic_state is KinematicState.IDLE and vehicle.plan.next_stop is not None:
            depart(state, policy, vehicle, t)

    for when, passenger in state.pop_reached(t_next):
        passenger.reach(when)
        state.log("reach", passenger.id, passenger.assigned_vehicle, t=when)
        policy.on_reach(state, passenger)
    for when, passenger in state.pop_egressed(t_next):
        passenger.finish(when)
        state.finalize(passenger)

    for vehicle in state.vehicles:
        if not vehicle.dispatched:
            continue
        if vehicle.kinematic_state is KinematicState.DWELLING:
            _board(state, policy, vehicle, vehicle.current_stop, t_next)
            vehicle.dwell_remaining -= dt
            if vehicle.dwell_remaining <= EPS:
                depart(state, policy, vehicle, t_next)
        elif vehicle.kinematic_state is KinematicState.MOVING:
            _drive(state, policy, vehicle, t, t_next)

    state.clock = t_next
    if state.trace is not None:
        for vehicle in state.vehicles:
            if vehicle.dispatched:
                state.trace.append(
                    (
                        t_next,
                        vehicle.id,
                        vehicle.position.x,
                        vehicle.position.y,
                        vehicle.kinematic_state.value,
                        len(vehicle.onboard),
                    )
                )
    if __debug__:
        state.check_conservation()
    return state


def init_state(
    scenario: ScenarioParams, design: SystemDesign, demand: Sequence[Passenger], policy: Policy, trace: bool = False
) -> EngineState:
    """Build the initial state of a run; demand times are relative to the demand window."""
    warmup = policy.warmup_duration()
    state = EngineState(
        scenario=scenario,
        design=design,
        kinematics=policy.kinematics,
        warmup=warmup,
        trace=[] if trace else None,
    )
    ordered = sorted(demand, key=lambda p: (p.arrival_time, p.id))
    for passenger in ordered:
        if not 0.0 <= passenger.arrival_time < scenario.sim_length:
            raise SimulationError(
                f"passenger {passenger.id} arrives at {passenger.arrival_time} s, outside [0, {scenario.sim_length})"
            )
    state.pending_requests = deque(p.clone(warmup) for p in ordered)
    state.vehicles = policy.build_fleet()
    return state


def simulate(
    scenario: ScenarioParams,
    design: SystemDesign,
    demand: Sequence[Passenger],
    *,
    trace: bool = False,
    drain_limit: float = DEFAULT_DRAIN_LIMIT,
    policy: Policy | None = None,
) -> RunResult:
    """Run one design over one demand list and return the raw result.

    The demand window is ``[warmup, warmup + sim_length)``. After it closes the engine keeps
    stepping until every passenger is served or rejected.

    Raises:
        SimulationError: On a broken engine invariant or a drain longer than ``drain_limit``.
    """
    policy = policy or make_policy(design, scenario)
    state = init_state(scenario, design, demand, policy, trace)
    fingerprint = demand_fingerprint(list(demand))
    logger.info(
        "Running design '%s' (%s) on scenario '%s' seed=%d: %d passengers, warm-up %.0f s.",
        design.design_id,
        policy.name,
        scenario.scenario_id,
        scenario.seed,
        len(demand),
        state.warmup,
    )
    while state.clock < state.window_end - EPS or state.pending_requests:
        step(state, policy)

    state.draining = True
    policy.begin_drain(state)
    drain_start = state.clock
    while state.active:
        if state.clock - drain_start > drain_limit:
            raise SimulationError(
                f"drain did not finish within {drain_limit} s: {len(state.active)} passengers still in progress"
            )
        step(state, policy)
    state.check_conservation()
    logger.info(
        "Design '%s' done: served=%d rejected=%d, drain %.0f s.",
        design.design_id,
        state.served,
        state.rejected,
        state.clock - drain_start,
    )
    return RunResult(
        scenario=scenario,
        design=design,
        policy=policy.name,
        warmup=state.warmup,
        end_clock=state.clock,
        passengers=sorted(state.passengers.values(), key=lambda p: p.id),
        vehicles=state.vehicles,
        events=state.events,
        trace=state.trace,
        demand_fingerprint=fingerprint,
        counters=dict(policy.counters),
    )


def run(scenario: ScenarioParams, design: SystemDesign, demand: Sequence[Passenger], *, trace: bool = False) -> RunReport:
    """Run one design and aggregate it into a :class:`~transit_sandbox.metrics.report.RunReport`."""
    from transit_sandbox.metrics.report import aggregate

    return aggregate(simulate(scenario, design, demand, trace=trace))
