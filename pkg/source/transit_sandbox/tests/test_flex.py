import os
import unittest
from dataclasses import replace
from unittest import mock

from transit_sandbox.core.demand import generate_passengers
from transit_sandbox.core.geometry import Direction, Point
from transit_sandbox.core.params import FlexDesign, ScenarioParams
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.plan import StopKind, insert_point
from transit_sandbox.engine.simulator import init_state, simulate
from transit_sandbox.engine.state import EngineState
from transit_sandbox.errors import DesignError
from transit_sandbox.metrics.report import aggregate, audit_run, event_log_average, vmt_double_entry
from transit_sandbox.policies import make_policy
from transit_sandbox.policies.flex.insertion import (
    FlexSearchStats,
    InsertionMode,
    direct_insertion,
    insertion_section,
    meeting_points,
    search_insertion,
)
from transit_sandbox.policies.flex.timetable import (
    FlexTimetable,
    init_flex,
    segment_ledger,
    segment_timing,
    within_timetable,
)
from transit_sandbox.policies.insertion import project_candidate, vehicle_baseline
from transit_sandbox.sweep.config import load_config, with_seed

TINY_CONFIG = os.path.join(os.path.dirname(__file__), "data", "tiny.toml")


def b63_flex(**overrides) -> FlexDesign:
    values = dict(S_c=10, f=5.0, V=20, K=40, t_c=7200.0, zeta_w=720.0, zeta_b=0.4)
    values.update(overrides)
    return FlexDesign("flex_sc10", **values)


class TestFlexTimetable(unittest.TestCase):
    def setUp(self):
        self.scenario = ScenarioParams()
        self.timetable = FlexTimetable.for_design(b63_flex(), self.scenario)

    def test_segment_timing(self):
        t_t, slack = segment_timing(b63_flex(), self.scenario)
        self.assertAlmostEqual(t_t, 459.95, delta=0.1)
        self.assertAlmostEqual(slack, 320.05, delta=0.1)
        self.assertEqual(len(self.timetable.segments), 9)
        self.assertAlmostEqual(self.timetable.segments[0].slack_left, slack)

    def test_negative_slack_is_a_design_error(self):
        with self.assertRaises(DesignError) as ctx:
            FlexTimetable.for_design(b63_flex(t_c=1000.0), self.scenario)
        self.assertEqual(ctx.exception.parameter, "t_c")

    def test_departures(self):
        timetable = self.timetable
        self.assertEqual(timetable.period, 7200.0)
        self.assertEqual([timetable.departure(0.0, 0, k) for k in range(3)], [20.0, 820.0, 1620.0])
        self.assertEqual(timetable.departure(720.0, 1, 1), 720.0 + 20.0 + 7200.0 + 800.0)

    def test_trip_stops_alternate_direction(self):
        outbound = self.timetable.trip_stops(0.0, 0)
        inbound = self.timetable.trip_stops(0.0, 1)
        self.assertEqual([s.stop_index for s in outbound], list(range(10)))
        # later trips start at the terminal the previous one ended at
        self.assertEqual([s.stop_index for s in inbound], list(range(8, -1, -1)))
        self.assertTrue(all(s.direction is Direction.BACKWARD for s in inbound))
        self.assertTrue(self.timetable.is_terminal(outbound[-1]))
        self.assertTrue(self.timetable.is_terminal(inbound[-1]))
        self.assertFalse(self.timetable.is_terminal(outbound[3]))

    def test_init_flex_keeps_spare_vehicles_in_reserve(self):
        fleet, timetable = init_flex(b63_flex(V=25), self.scenario)
        self.assertEqual(len(fleet), 25)
        self.assertTrue(all(v.position == timetable.checkpoints[0] for v in fleet))
        times = [v.dispatch_time for v in fleet]
        self.assertEqual(times[:3], [0.0, 720.0, 1440.0])
        self.assertEqual(sum(t is not None for t in times), 20)

    def test_insertion_section(self):
        stops = self.timetable.trip_stops(0.0, 0) + self.timetable.trip_stops(0.0, 1)
        self.assertEqual(insertion_section(stops, Direction.FORWARD, 10), (0, 9))
        self.assertEqual(insertion_section(stops, Direction.BACKWARD, 10), (9, 18))


class TestFlexInsertion(unittest.TestCase):
    def setUp(self):
        self.scenario = ScenarioParams()
        self.design = b63_flex()
        self.policy = make_policy(self.design, self.scenario)
        self.state = init_state(self.scenario, self.design, [], self.policy)
        self.policy.dispatch(self.state)
        self.vehicle = self.state.vehicles[0]
        self.baseline = vehicle_baseline(self.state, self.vehicle)

    def _search(self, passenger: Passenger, modes=frozenset(InsertionMode), **kwargs):
        return search_insertion(
            self.baseline, passenger, 0.0, self.design, self.scenario, self.policy.kinematics, modes, **kwargs
        )

    def _checkpoints(self, stops):
        return [s.stop_index for s in stops if s.kind is StopKind.CHECKPOINT]

    def test_dispatch_plans_two_trips(self):
        self.assertTrue(self.vehicle.dispatched)
        self.assertEqual(self.vehicle.trips_planned, 2)
        self.assertEqual(len(self.vehicle.plan.remaining), 19)

    def test_forward_request_keeps_timetable(self):
        passenger = Passenger(0, 0.0, Point(1.0, 0.9), Point(6.0, 0.7))
        candidate = self._search(passenger)
        self.assertIsNotNone(candidate)
        self.assertLessEqual(candidate.k2, 10)
        self.assertEqual(self._checkpoints(candidate.stops), self._checkpoints(self.baseline.stops))
        projection = project_candidate(
            self.baseline, candidate.stops, self.policy.kinematics, passenger.id, candidate.access_walk
        )
        self.assertTrue(within_timetable(segment_ledger(candidate.stops, projection, self.policy.kinematics)))
        self.assertLessEqual(candidate.pickup_time, self.design.zeta_w)

    def test_direct_mode_serves_the_doorstep(self):
        passenger = Passenger(0, 0.0, Point(1.0, 0.9), Point(6.0, 0.7))
        candidate = direct_insertion(self.baseline, passenger, 0.0, self.design, self.scenario, self.policy.kinematics)
        self.assertIsNotNone(candidate)
        self.assertIs(candidate.mode, InsertionMode.DIRECT)
        self.assertEqual((candidate.pickup_point, candidate.dropoff_point), (passenger.origin, passenger.destination))
        self.assertEqual((candidate.access_walk, candidate.egress_walk), (0.0, 0.0))

    def test_walking_never_costs_more(self):
        passenger = Passenger(0, 0.0, Point(1.0, 1.2), Point(6.0, 0.5))
        best = self._search(passenger)
        direct = self._search(passenger, frozenset({InsertionMode.DIRECT}))
        self.assertIsNotNone(direct)
        self.assertLessEqual(best.cost, direct.cost)
        if best.mode is InsertionMode.WALK:
            self.assertLessEqual(max(best.access_walk, best.egress_walk), 0.8 / 5.0 * 3600.0 + 1.0)

    def test_backward_request_rides_the_next_trip(self):
        passenger = Passenger(0, 0.0, Point(12.0, 0.9), Point(8.0, 0.7))
        design = replace(self.design, zeta_w=20000.0)
        candidate = search_insertion(self.baseline, passenger, 0.0, design, self.scenario, self.policy.kinematics)
        self.assertIsNotNone(candidate)
        self.assertGreater(candidate.k1, 9)

    def test_origin_on_a_planned_stop_merges_without_walking(self):
        stop_point = Point(2.0, 1.0)
        rider = Passenger(99, 0.0, self.vehicle.position, stop_point)
        rider.assign(0.0, self.vehicle.id, rider.origin, rider.destination)
        rider.board(0.0, self.vehicle.id)
        self.state.passengers[99] = rider
        self.vehicle.onboard.add(99)
        stops, index, _ = insert_point(self.vehicle.plan.remaining, 2, stop_point, dropoff=99)
        self.vehicle.plan.replace_remaining(stops)
        baseline = vehicle_baseline(self.state, self.vehicle)

        section = insertion_section(baseline.stops, Direction.FORWARD, self.design.S_c)
        options = meeting_points(baseline.stops, section, stop_point, True, self.scenario)
        self.assertIn(index + 1, [o.gap for o in options if o.point == stop_point])
        for option in options:
            if option.point == stop_point:
                self.assertEqual((option.walking, option.walk), (False, 0.0))
            if option.walking:
                self.assertGreater(option.walk, 0.0)

        passenger = Passenger(0, 0.0, stop_point, Point(5.0, 0.8))
        design = replace(self.design, zeta_w=3600.0)
        candidate = direct_insertion(baseline, passenger, 0.0, design, self.scenario, self.policy.kinematics)
        self.assertIsNotNone(candidate)
        self.assertEqual(candidate.k1, index)
        self.assertEqual(candidate.stops[index].pickups, frozenset({0}))
        self.assertEqual(candidate.stops[index].dropoffs, frozenset({99}))
        self.assertEqual(len(candidate.stops), len(baseline.stops) + 1)
        self.assertIs(candidate.mode, InsertionMode.DIRECT)
        self.assertEqual(candidate.access_walk, 0.0)

    def test_prefilter_keeps_the_best_candidate(self):
        for index, (o, d) in enumerate(
            [
                (Point(1.0, 0.9), Point(6.0, 0.7)),
                (Point(0.5, 1.5), Point(3.0, 0.1)),
                (Point(2.0, 0.8), Point(2.5, 1.6)),
                (Point(1.4, 0.0), Point(12.9, 1.0)),
            ]
        ):
            passenger = Passenger(index, 0.0, o, d)
            stats_fast, stats_full = FlexSearchStats(), FlexSearchStats()
            fast = self._search(passenger, prefilter=True, stats=stats_fast)
            full = self._search(passenger, prefilter=False, stats=stats_full)
            self.assertEqual(None if fast is None else fast.key, None if full is None else full.key)
            self.assertLessEqual(stats_fast.evaluated, stats_full.evaluated)


class TestFlexRetryPool(unittest.TestCase):
    def setUp(self):
        self.scenario = ScenarioParams()
        self.design = b63_flex(zeta_w=300.0)
        self.policy = make_policy(self.design, self.scenario)
        # no vehicles, so every attempt fails
        self.state = EngineState(self.scenario, self.design, self.policy.kinematics, warmup=0.0, clock=100.0)
        self.passenger = Passenger(0, 100.0, Point(1.0, 0.9), Point(6.0, 0.7))
        self.state.release(self.passenger)
        self.policy.assign(self.state, self.passenger)

    def _step(self, t: int):
        self.state.clock = float(t)
        self.policy.retry_pooled(self.state)

    def test_retries_follow_the_interval_until_timeout(self):
        self.assertEqual(self.policy.counters["pooled"], 1)
        retried_at = []
        for t in range(100, 401):
            before = self.policy.counters.get("retries", 0)
            self._step(t)
            if self.policy.counters.get("retries", 0) > before:
                retried_at.append(t)
            if t < 400:
                self.assertEqual(len(self.state.rejected_pool), 1)
                self.assertIsNone(self.passenger.reject_reason)
        self.assertEqual(retried_at, list(range(130, 400, 30)))
        self.assertEqual(self.policy.counters["timed_out"], 1)
        self.assertNotIn("resurrected", self.policy.counters)
        self.assertEqual(self.passenger.reject_reason, "timeout")
        self.assertEqual(self.passenger.rejection_time, 400.0)
        self.assertEqual(self.state.rejected_pool, [])

    def test_retry_commits_once_a_vehicle_fits(self):
        with mock.patch.object(self.policy, "_try_assign", return_value=True) as attempt:
            self._step(100)
            self._step(129)
            attempt.assert_not_called()
            self._step(130)
            attempt.assert_called_once_with(self.state, self.passenger)
        self.assertEqual(self.policy.counters["retries"], 1)
        self.assertEqual(self.policy.counters["resurrected"], 1)
        self.assertEqual(self.state.rejected_pool, [])
        self.assertIsNone(self.passenger.reject_reason)



class TestFlexPolicy(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        config = load_config(TINY_CONFIG)
        cls.scenario = with_seed(config.scenario(), 1)
        cls.design = config.design("flex")
        cls.demand = generate_passengers(cls.scenario, 0.0, cls.scenario.sim_length)
        cls.result = simulate(cls.scenario, cls.design, cls.demand)
        cls.report = aggregate(cls.result)

    def test_run_is_feasible(self):
        self.assertEqual(self.report.total_ridership + self.report.rejected, len(self.demand))
        self.assertGreater(self.report.total_ridership, 0)
        self.assertEqual(audit_run(self.result), [])
        self.assertTrue(vmt_double_entry(self.result).agrees(1e-6))
        self.assertAlmostEqual(event_log_average(self.result), self.report.avg_weighted_travel_time, places=6)

    def test_prefilter_does_not_change_the_run(self):
        policy = make_policy(self.design, self.scenario)
        policy.prefilter = False
        exhaustive = simulate(self.scenario, self.design, self.demand, policy=policy)
        self.assertEqual(exhaustive.events, self.result.events)

    def test_original_mode_serves_doorsteps_only(self):
        design = replace(self.design, design_id="flex_original", walking_enabled=False)
        result = simulate(self.scenario, design, self.demand)
        self.assertEqual(audit_run(result), [])
        for passenger in result.passengers:
            self.assertEqual((passenger.t_access, passenger.t_egress), (0.0, 0.0))
        self.assertEqual(result.counters.get("assigned_walk", 0), 0)

    def test_pooled_requests_are_retried_or_timed_out(self):
        design = replace(self.design, design_id="flex_small", V=1, K=1)
        busy = replace(self.scenario, lam=200.0)
        demand = generate_passengers(busy, 0.0, busy.sim_length)
        result = simulate(busy, design, demand)
        counters = result.counters
        self.assertGreater(counters.get("pooled", 0), 0)
        self.assertLessEqual(counters.get("resurrected", 0), counters.get("retries", 0))
        reasons = {p.reject_reason for p in result.passengers if p.reject_reason is not None}
        self.assertTrue(reasons <= {"timeout", "unassigned_at_close"})
        for passenger in result.passengers:
            if passenger.reject_reason == "timeout":
                self.assertGreaterEqual(passenger.rejection_time - passenger.arrival_time, design.zeta_w - 1e-9)
        self.assertEqual(audit_run(result), [])


if __name__ == "__main__":
    unittest.main()
