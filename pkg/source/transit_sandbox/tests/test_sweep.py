import os
import tempfile
import unittest
from unittest import mock

import pandas as pd

from transit_sandbox.errors import SimulationError
from transit_sandbox.metrics.report import reports_frame
from transit_sandbox.sweep import runner
from transit_sandbox.sweep.config import load_config
from transit_sandbox.sweep.runner import run_single, run_sweep, sweep_demand, write_sweep_outputs

TINY_CONFIG = os.path.join(os.path.dirname(__file__), "data", "tiny.toml")


class TestSweep(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cfg = load_config(TINY_CONFIG)
        cfg.seeds = [1, 2]
        cls.spec = cfg.sweep_spec()
        cls.result = run_sweep(cls.spec, parallelism=1)

    def test_every_cell_runs_in_order(self):
        self.assertTrue(self.result.ok)
        self.assertEqual(self.spec.total_runs, 6)
        self.assertEqual(
            [(r.design_id, r.seed) for r in self.result.reports],
            [(d.design_id, seed) for _, d, seed in self.spec.cells()],
        )

    def test_designs_share_demand(self):
        demand = sweep_demand(self.spec)
        self.assertEqual(sorted(demand), [("tiny", 1), ("tiny", 2)])
        for seed in (1, 2):
            fingerprints = {r.demand_fingerprint for r in self.result.reports if r.seed == seed}
            self.assertEqual(len(fingerprints), 1)
        self.assertNotEqual(self.result.reports[0].demand_fingerprint, self.result.reports[1].demand_fingerprint)

    def test_single_run_matches_the_sweep(self):
        scenario, design, seed = next(self.spec.cells())
        demand = sweep_demand(self.spec)[(scenario.scenario_id, seed)]
        report = run_single(scenario, design, seed, demand)
        self.assertEqual(report.row(), self.result.reports[0].row())

    def test_parallel_sweep_is_identical(self):
        parallel = run_sweep(self.spec, parallelism=2)
        pd.testing.assert_frame_equal(reports_frame(parallel.reports), reports_frame(self.result.reports))

    def test_failures_are_recorded(self):
        simulate = runner.simulate

        def flaky(scenario, design, demand, **kwargs):
            if design.design_id == "flex":
                raise SimulationError("drain did not finish")
            return simulate(scenario, design, demand, **kwargs)

        with mock.patch.object(runner, "simulate", side_effect=flaky):
            with self.assertLogs("transit_sandbox.sweep.runner", "ERROR"):
                result = run_sweep(self.spec, parallelism=1)
        self.assertFalse(result.ok)
        self.assertEqual(len(result.reports), 4)
        self.assertEqual([(f.design_id, f.seed) for f in result.failures], [("flex", 1), ("flex", 2)])
        self.assertIn("SimulationError", result.failures[0].error)

        with tempfile.TemporaryDirectory() as out_dir:
            paths = write_sweep_outputs(result, out_dir)
            self.assertEqual(os.path.basename(paths[-1]), "failures.csv")
            self.assertEqual(len(pd.read_csv(paths[-1])), 2)
            self.assertEqual(len(pd.read_csv(paths[0])), 4)

    def test_run_outputs(self):
        with tempfile.TemporaryDirectory() as run_dir:
            run_sweep(self.spec, parallelism=1, run_dir=run_dir)
            self.assertEqual(len([n for n in os.listdir(run_dir) if n.endswith("__report.csv")]), 6)


if __name__ == "__main__":
    unittest.main()
