import os
import tempfile
import unittest
from dataclasses import replace

import pandas as pd

from transit_sandbox.core.demand import generate_passengers
from transit_sandbox.engine.simulator import simulate
from transit_sandbox.errors import ReportError
from transit_sandbox.metrics import PassengerOutcome, aggregate, compare, weighted_travel_time
from transit_sandbox.metrics.report import (
    PASSENGER_COLUMNS,
    REPORT_COLUMNS,
    flex_walking_table,
    kpi_table,
    weighted_times_from_events,
    write_comparison_tables,
    write_run_outputs,
)
from transit_sandbox.sweep.config import load_config, with_seed

TINY_CONFIG = os.path.join(os.path.dirname(__file__), "data", "tiny.toml")
GAMMAS = (1.0, 1.59, 1.79)


def outcome(t_invehicle: float, t_wait: float, t_access: float = 0.0, t_egress: float = 0.0) -> PassengerOutcome:
    return PassengerOutcome(0, True, t_access, t_wait, t_invehicle, t_egress, None)


class TestWeightedTravelTime(unittest.TestCase):
    def test_weighted_sum_in_minutes(self):
        self.assertAlmostEqual(weighted_travel_time(outcome(1200.0, 300.0, 300.0, 300.0), *GAMMAS), 45.85)
        self.assertEqual(weighted_travel_time(outcome(0.0, 0.0), *GAMMAS), 0.0)
        self.assertAlmostEqual(weighted_travel_time(outcome(900.0, 240.0), *GAMMAS), 21.36)

    def test_times_from_events(self):
        events = [
            (0.0, "request", 7, None, ""),
            (10.0, "assign_flex", 7, 0, "1,2,mode=walk"),
            (70.0, "reach", 7, 0, ""),
            (300.0, "board", 7, 0, ""),
            (900.0, "alight", 7, 0, ""),
            (960.0, "served", 7, 0, ""),
            (5.0, "request", 8, None, ""),
            (5.0, "reject", 8, None, "timeout"),
        ]
        times = weighted_times_from_events(events, GAMMAS)
        self.assertEqual(list(times), [7])
        # access 60, wait 240, ride 600, egress 60
        self.assertAlmostEqual(times[7], (600.0 + 1.59 * 240.0 + 1.79 * 120.0) / 60.0)


class TestReports(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        config = load_config(TINY_CONFIG)
        scenario = with_seed(config.scenario(), 1)
        demand = generate_passengers(scenario, 0.0, scenario.sim_length)
        cls.reports = [aggregate(simulate(scenario, design, demand)) for design in config.designs["tiny"]]
        flex = config.design("flex")
        original = replace(flex, design_id="flex_original", walking_enabled=False)
        cls.flex_reports = [cls.reports[1], aggregate(simulate(scenario, original, demand))]

    def test_report_totals(self):
        for report in self.reports:
            self.assertEqual(report.demand, len(report.per_passenger))
            self.assertAlmostEqual(report.total_vmt, sum(report.per_vehicle_vmt))
            served = [o.weighted_time for o in report.per_passenger if o.served]
            self.assertEqual(report.total_ridership, len(served))
            self.assertTrue(all(o.weighted_time is None for o in report.per_passenger if not o.served))

    def test_compare_against_itself(self):
        frame = compare([self.reports[0], self.reports[0]])
        for column in ("ridership_ratio", "wtt_ratio", "vmt_ratio"):
            self.assertEqual(list(frame[column]), [1.0, 1.0])

    def test_compare_ratios(self):
        frame = compare(self.reports)
        self.assertEqual(list(frame["design_id"]), ["fixed", "flex", "ondemand"])
        self.assertAlmostEqual(frame["vmt_ratio"][2], self.reports[2].total_vmt / self.reports[0].total_vmt)

    def test_compare_refuses_bad_input(self):
        with self.assertRaises(ReportError):
            compare(self.reports[:1])
        with self.assertRaises(ReportError):
            compare([self.reports[0], replace(self.reports[1], demand_fingerprint="0" * 64)])

    def test_kpi_table(self):
        table = kpi_table(self.reports, "ridership")
        self.assertEqual(list(table.columns), ["design_id", "tiny"])
        self.assertEqual(list(table["tiny"]), [r.total_ridership for r in self.reports])

    def test_flex_walking_table(self):
        table = flex_walking_table(self.flex_reports)
        self.assertEqual(len(table), 1)
        row = table.iloc[0]
        self.assertEqual(row["S_c"], 3)
        self.assertEqual(row["ridership_extended"], self.flex_reports[0].total_ridership)
        self.assertEqual(row["ridership_original"], self.flex_reports[1].total_ridership)
        self.assertTrue(flex_walking_table(self.reports).empty)

    def test_written_files(self):
        with tempfile.TemporaryDirectory() as out_dir:
            paths = write_run_outputs(self.reports[1], out_dir, trace=True)
            self.assertEqual(len(paths), 3)
            self.assertEqual(list(pd.read_csv(paths[0]).columns), REPORT_COLUMNS)
            passengers = pd.read_csv(paths[1])
            self.assertEqual(list(passengers.columns), PASSENGER_COLUMNS)
            self.assertEqual(len(passengers), self.reports[1].demand)

            tables = write_comparison_tables(self.reports + self.flex_reports[1:], out_dir)
            self.assertEqual(
                [os.path.basename(p) for p in tables],
                [
                    "ridership_by_design.csv",
                    "avg_wtt_by_design.csv",
                    "vmt_by_design.csv",
                    "flex_walking_comparison.csv",
                ],
            )


if __name__ == "__main__":
    unittest.main()
