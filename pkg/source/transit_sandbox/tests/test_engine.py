import os
import unittest

from transit_sandbox.core.demand import generate_passengers
from transit_sandbox.core.geometry import Point
from transit_sandbox.core.passenger import Passenger, PassengerState
from transit_sandbox.engine.simulator import init_state, simulate, warmup_duration
from transit_sandbox.errors import SimulationError
from transit_sandbox.metrics.report import aggregate
from transit_sandbox.policies import make_policy
from transit_sandbox.sweep.config import load_config, with_seed

TINY_CONFIG = os.path.join(os.path.dirname(__file__), "data", "tiny.toml")


class TestEngine(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = load_config(TINY_CONFIG)
        cls.scenario = with_seed(cls.config.scenario(), 1)
        cls.demand = generate_passengers(cls.scenario, 0.0, cls.scenario.sim_length)

    def test_warmup_per_policy(self):
        for design_id in ("fixed", "flex"):
            design = self.config.design(design_id)
            self.assertEqual(warmup_duration(design), 2.0 * design.t_c)
            self.assertEqual(make_policy(design, self.scenario).warmup_duration(), 2.0 * design.t_c)
        self.assertEqual(warmup_duration(self.config.design("ondemand")), 0.0)

    def test_demand_is_shifted_by_the_warmup(self):
        design = self.config.design("flex")
        policy = make_policy(design, self.scenario)
        state = init_state(self.scenario, design, self.demand, policy)
        self.assertEqual(state.warmup, 3600.0)
        self.assertEqual(state.window_end, 3600.0 + self.scenario.sim_length)
        first = min(self.demand, key=lambda p: (p.arrival_time, p.id))
        self.assertEqual(state.pending_requests[0].arrival_time, first.arrival_time + 3600.0)
        # the caller's list is left untouched
        self.assertTrue(all(p.state is PassengerState.UNASSIGNED for p in self.demand))

    def test_demand_outside_the_window_is_refused(self):
        design = self.config.design("ondemand")
        late = [Passenger(0, self.scenario.sim_length, Point(0.5, 0.5), Point(3.5, 0.5))]
        with self.assertRaises(SimulationError):
            init_state(self.scenario, design, late, make_policy(design, self.scenario))

    def test_no_demand(self):
        for design in self.config.designs["tiny"]:
            with self.subTest(design=design.design_id):
                report = aggregate(simulate(self.scenario, design, []))
                self.assertEqual(report.total_ridership, 0)
                self.assertEqual(report.rejected, 0)
                self.assertIsNone(report.avg_weighted_travel_time)

    def test_runs_are_deterministic(self):
        for design in self.config.designs["tiny"]:
            with self.subTest(design=design.design_id):
                first = simulate(self.scenario, design, self.demand)
                second = simulate(self.scenario, design, self.demand)
                self.assertEqual(first.events, second.events)
                self.assertEqual(aggregate(first).row(), aggregate(second).row())

    def test_events_are_logged_in_order(self):
        result = simulate(self.scenario, self.config.design("fixed"), self.demand)
        for pid in (p.id for p in result.passengers if p.state is PassengerState.SERVED):
            names = [e[1] for e in result.events if e[2] == pid]
            self.assertEqual(names[0], "request")
            self.assertEqual(names[-1], "served")
            self.assertLess(names.index("board"), names.index("alight"))

    def test_drain_limit(self):
        design = self.config.design("fixed")
        last_call = [Passenger(0, self.scenario.sim_length - 1.0, Point(0.1, 0.1), Point(3.9, 0.9))]
        with self.assertRaises(SimulationError):
            simulate(self.scenario, design, last_call, drain_limit=1.0)
        report = aggregate(simulate(self.scenario, design, last_call))
        self.assertEqual(report.total_ridership, 1)


if __name__ == "__main__":
    unittest.main()
