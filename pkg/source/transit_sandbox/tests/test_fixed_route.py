import os
import unittest
from dataclasses import replace

from transit_sandbox.core.demand import generate_passengers
from transit_sandbox.core.geometry import Direction, Point, km_to_miles
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.simulator import run, simulate
from transit_sandbox.errors import DegenerateTripError
from transit_sandbox.metrics.report import aggregate, audit_run, event_log_average, vmt_double_entry
from transit_sandbox.policies.fixed.layout import FixedLayout, assign_fixed
from transit_sandbox.sweep.config import load_config, with_seed

TINY_CONFIG = os.path.join(os.path.dirname(__file__), "data", "tiny.toml")


class TestFixedLayout(unittest.TestCase):
    def setUp(self):
        config = load_config(TINY_CONFIG)
        self.layout = FixedLayout.for_design(config.design("fixed"), config.scenario())

    def test_stops_are_evenly_spaced(self):
        self.assertEqual(len(self.layout), 5)
        self.assertEqual([p.x for p in self.layout.stop_positions], [0.0, 1.0, 2.0, 3.0, 4.0])
        self.assertTrue(all(p.y == 0.5 for p in self.layout.stop_positions))

    def test_nearest_stop_ties_go_to_lower_index(self):
        self.assertEqual(self.layout.nearest_stop(Point(1.5, 0.0)), 1)
        self.assertEqual(self.layout.nearest_stop(Point(3.9, 1.0)), 4)

    def test_assignment(self):
        trip = assign_fixed(Passenger(0, 0.0, Point(3.2, 0.1), Point(0.4, 0.9)), self.layout)
        self.assertEqual((trip.boarding_index, trip.alighting_index, trip.direction), (3, 0, Direction.BACKWARD))
        with self.assertRaises(DegenerateTripError):
            assign_fixed(Passenger(1, 0.0, Point(0.9, 0.1), Point(1.3, 0.9)), self.layout)


class TestFixedRoute(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        config = load_config(TINY_CONFIG)
        cls.scenario = with_seed(config.scenario(), 1)
        cls.design = config.design("fixed")
        cls.demand = generate_passengers(cls.scenario, 0.0, cls.scenario.sim_length)
        cls.report = run(cls.scenario, cls.design, cls.demand, trace=True)

    def test_every_passenger_is_accounted_for(self):
        self.assertEqual(self.report.total_ridership + self.report.rejected, len(self.demand))
        self.assertGreater(self.report.total_ridership, 0)
        for outcome in self.report.per_passenger:
            if not outcome.served:
                self.assertEqual(outcome.reject_reason, "same_stop")

    def test_audits_pass(self):
        self.assertEqual(audit_run(self.report.result), [])
        self.assertTrue(vmt_double_entry(self.report.result).agrees(1e-6))
        self.assertAlmostEqual(event_log_average(self.report.result), self.report.avg_weighted_travel_time, places=6)

    def test_warmup_is_two_cycles(self):
        self.assertAlmostEqual(self.report.result.warmup, 2.0 * self.design.t_c)
        arrivals = {p.id: p.arrival_time for p in self.demand}
        for outcome in self.report.per_passenger:
            self.assertAlmostEqual(outcome.arrival_s, arrivals[outcome.id])

    def test_trace_rows(self):
        trace = self.report.result.trace
        self.assertTrue(trace)
        self.assertEqual(len(trace[0]), 6)

    def test_vmt_does_not_depend_on_demand(self):
        spacing_mi = km_to_miles(1.0)
        other = replace(self.scenario, lam=120.0)
        heavier = run(other, self.design, generate_passengers(other, 0.0, other.sim_length))
        self.assertAlmostEqual(heavier.total_vmt, self.report.total_vmt, delta=spacing_mi)
        self.assertGreater(self.report.total_vmt, 0.0)

    def test_trip_within_one_stop_is_rejected(self):
        demand = [
            Passenger(0, 10.0, Point(0.9, 0.1), Point(1.3, 0.9)),
            Passenger(1, 20.0, Point(0.1, 0.1), Point(3.9, 0.9)),
        ]
        with self.assertLogs("transit_sandbox.policies.fixed.policy", level="WARNING"):
            report = aggregate(simulate(self.scenario, self.design, demand))
        self.assertEqual((report.total_ridership, report.rejected), (1, 1))
        self.assertEqual(report.per_passenger[0].reject_reason, "same_stop")
        self.assertTrue(report.per_passenger[1].served)


if __name__ == "__main__":
    unittest.main()
