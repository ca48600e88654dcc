"""Full-scale directional checks on the bundled case study.

These run hundreds of four-hour simulations; enable them with ``TRANSIT_SANDBOX_ACCEPTANCE=1``.
"""

import filecmp
import os
import tempfile
import unittest

import numpy as np

from transit_sandbox.core.demand import generate_passengers
from transit_sandbox.core.geometry import km_to_miles
from transit_sandbox.metrics.report import audit_run, write_reports_csv
from transit_sandbox.sweep.config import load_config, with_seed
from transit_sandbox.sweep.runner import run_single, run_sweep

ENABLED = os.environ.get("TRANSIT_SANDBOX_ACCEPTANCE") == "1"
SEEDS = list(range(2021, 2031))


def run_designs(cfg, scenario_id, design_ids, seeds):
    """Reports keyed by (design id, seed); designs of a seed share one demand list."""
    reports = {}
    for seed in seeds:
        scenario = with_seed(cfg.scenario(scenario_id), seed)
        demand = generate_passengers(scenario, 0.0, scenario.sim_length)
        for design_id in design_ids:
            design = cfg.design(design_id, scenario_id)
            reports[(design_id, seed)] = run_single(scenario, design, seed, demand, drain_limit=cfg.drain_limit)
    return reports


@unittest.skipUnless(ENABLED, "set TRANSIT_SANDBOX_ACCEPTANCE=1 to run the full-scale case study")
class TestCaseStudy(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.cfg = load_config("b63_case_study")

    def test_every_run_is_feasible(self):
        result = run_sweep(self.cfg.sweep_spec())
        self.assertTrue(result.ok)
        self.assertEqual(len(result.reports), 15)
        for scenario in self.cfg.scenarios:
            reports = run_designs(self.cfg, scenario.scenario_id, self.cfg.design_ids, self.cfg.seeds)
            for report in reports.values():
                self.assertEqual(audit_run(report.result), [], report.design_id)

    def test_fixed_route_invariance(self):
        design = self.cfg.design("fixed_existing")
        spacing = km_to_miles(self.cfg.scenario().L / (design.S - 1))
        reports = [
            run_designs(self.cfg, s.scenario_id, ["fixed_existing"], [2021])[("fixed_existing", 2021)]
            for s in self.cfg.scenarios
        ]
        vmt = [r.total_vmt for r in reports]
        self.assertLessEqual(max(vmt) - min(vmt), spacing)
        wtt = np.array([r.avg_weighted_travel_time for r in reports])
        self.assertLess(wtt.std() / wtt.mean(), 0.05)

    def test_fixed_route_ridership_scales_with_demand(self):
        seeds = SEEDS[:5]
        ridership = {
            s.scenario_id: np.mean(
                [r.total_ridership for r in run_designs(self.cfg, s.scenario_id, ["fixed_existing"], seeds).values()]
            )
            for s in self.cfg.scenarios
        }
        self.assertAlmostEqual(ridership["medium"] / ridership["low"], 2.5, delta=2.5 * 0.15)
        self.assertAlmostEqual(ridership["high"] / ridership["low"], 5.0, delta=5.0 * 0.15)

    def test_walking_extension_serves_more(self):
        cfg = load_config("mast_walking")
        reports = run_designs(cfg, "low", cfg.design_ids, SEEDS)
        gains = []
        for size in (10, 20):
            for seed in SEEDS:
                original = reports[(f"mast_original_sc{size}", seed)].total_ridership
                extended = reports[(f"mast_extended_sc{size}", seed)].total_ridership
                self.assertGreaterEqual(extended, original)
                if size == 10:
                    gains.append(extended / original - 1.0)
        self.assertTrue(0.10 <= np.mean(gains) <= 1.50, gains)

    def test_policy_ordering_at_high_demand(self):
        design_ids = ["fixed_existing", "flex_sc20", "flex_sc10", "ondemand"]
        reports = run_designs(self.cfg, "high", design_ids, SEEDS)
        ordered = ratio_ok = 0
        for seed in SEEDS:
            ridership = [reports[(d, seed)].total_ridership for d in design_ids]
            ordered += ridership == sorted(ridership, reverse=True)
            ratio = reports[("ondemand", seed)].total_vmt / reports[("fixed_existing", seed)].total_vmt
            ratio_ok += 1.5 <= ratio <= 4.5
        self.assertGreaterEqual(ordered, 8)
        self.assertGreaterEqual(ratio_ok, 8)

    def test_on_demand_is_faster_at_low_demand(self):
        reports = run_designs(self.cfg, "low", ["fixed_existing", "ondemand"], SEEDS)
        faster = sum(
            reports[("ondemand", seed)].avg_weighted_travel_time
            < reports[("fixed_existing", seed)].avg_weighted_travel_time
            for seed in SEEDS
        )
        self.assertGreaterEqual(faster, 8)

    def test_parallel_reports_are_byte_identical(self):
        spec = self.cfg.sweep_spec()
        with tempfile.TemporaryDirectory() as tmp:
            serial, parallel = os.path.join(tmp, "serial.csv"), os.path.join(tmp, "parallel.csv")
            write_reports_csv(run_sweep(spec, parallelism=1).reports, serial)
            write_reports_csv(run_sweep(spec, parallelism=8).reports, parallel)
            self.assertTrue(filecmp.cmp(serial, parallel, shallow=False))


if __name__ == "__main__":
    unittest.main()
