"""Batch execution of every (scenario, design, seed) combination of a sweep."""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
from collections.abc import Sequence
from dataclasses import dataclass, field

import pandas as pd
import psutil

from transit_sandbox.core.demand import generate_passengers
from transit_sandbox.core.params import ScenarioParams, SystemDesign
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.engine.simulator import DEFAULT_DRAIN_LIMIT, simulate
from transit_sandbox.metrics.report import RunReport, aggregate, write_comparison_tables, write_reports_csv, write_run_outputs
from transit_sandbox.sweep.config import SweepSpec, with_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunFailure:
    scenario_id: str
    design_id: str
    seed: int
    error: str


@dataclass
class SweepResult:
    reports: list[RunReport] = field(default_factory=list)
    failures: list[RunFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class _RunTask:
    scenario: ScenarioParams
    design: SystemDesign
    seed: int
    demand: tuple[Passenger, ...]
    drain_limit: float
    run_dir: str | None
    trace: bool


def run_single(
    scenario: ScenarioParams,
    design: SystemDesign,
    seed: int,
    demand: Sequence[Passenger],
    *,
    trace: bool = False,
    drain_limit: float = DEFAULT_DRAIN_LIMIT,
) -> RunReport:
    """Simulate one design on one demand list with ``seed`` recorded in the report."""
    return aggregate(simulate(with_seed(scenario, seed), design, demand, trace=trace, drain_limit=drain_limit))


def sweep_demand(spec: SweepSpec) -> dict[tuple[str, int], list[Passenger]]:
    """One demand list per (scenario, seed), shared by every design of the cell."""
    demand = {}
    for scenario in spec.scenarios:
        for seed in spec.seeds:
            seeded = with_seed(scenario, seed)
            demand[(scenario.scenario_id, seed)] = generate_passengers(seeded, 0.0, seeded.sim_length)
    return demand


def default_parallelism() -> int:
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def _execute(task: _RunTask) -> tuple[RunReport | None, RunFailure | None]:
    try:
        report = run_single(
            task.scenario, task.design, task.seed, task.demand, trace=task.trace, drain_limit=task.drain_limit
        )
        if task.run_dir is not None:
            write_run_outputs(report, task.run_dir, trace=task.trace)
        return report.detached(), None
    except Exception as exc:
        logger.exception(
            "Run failed: design '%s' on '%s' seed=%d.", task.design.design_id, task.scenario.scenario_id, task.seed
        )
        failure = RunFailure(task.scenario.scenario_id, task.design.design_id, task.seed, f"{type(exc).__name__}: {exc}")
        return None, failure


def run_sweep(
    spec: SweepSpec, parallelism: int | None = None, *, run_dir: str | None = None, trace: bool = False
) -> SweepResult:
    """Execute every combination of ``spec``.

    Reports come back in (scenario, design, seed) order whatever the degree of parallelism. A
    failing run is logged and recorded; the rest of the sweep continues.

    Args:
        spec: The sweep.
        parallelism: Worker processes; defaults to the number of physical cores.
        run_dir: Directory for per-run report, passenger (and with ``trace`` event and trace) CSVs.
        trace: Record per-step vehicle traces.
    """
    demand = sweep_demand(spec)
    tasks = [
        _RunTask(
            scenario,
            design,
            seed,
            tuple(demand[(scenario.scenario_id, seed)]),
            spec.drain_limit,
            run_dir,
            trace,
        )
        for scenario, design, seed in spec.cells()
    ]
    assert len(tasks) == spec.total_runs
    processes = min(parallelism or default_parallelism(), max(1, len(tasks)))
    logger.info("Sweep of %d runs on %d processes.", len(tasks), processes)

    result = SweepResult()
    if processes == 1:
        _collect(map(_execute, tasks), result, len(tasks))
    else:
        with mp.get_context("spawn").Pool(processes=processes) as pool:
            _collect(pool.imap(_execute, tasks), result, len(tasks))
    return result


def _collect(outcomes, result: SweepResult, total: int):
    for done, (report, failure) in enumerate(outcomes, start=1):
        if failure is not None:
            result.failures.append(failure)
            continue
        result.reports.append(report)
        logger.info(
            "[%d/%d] %s on %s seed=%d: ridership=%d vmt=%.1f mi.",
            done,
            total,
            report.design_id,
            report.scenario_id,
            report.seed,
            report.total_ridership,
            report.total_vmt,
        )


def failures_frame(failures: Sequence[RunFailure]) -> pd.DataFrame:
    return pd.DataFrame(
        [(f.scenario_id, f.design_id, f.seed, f.error) for f in failures],
        columns=["scenario_id", "design_id", "seed", "error"],
    )


def write_sweep_outputs(result: SweepResult, out_dir: str | os.PathLike) -> list[str]:
    """Report CSV of every run plus the comparison tables, and the failed runs if any."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "reports.csv")]
    write_reports_csv(result.reports, paths[0])
    if result.reports:
        paths += write_comparison_tables(result.reports, out_dir)
    if result.failures:
        paths.append(os.path.join(out_dir, "failures.csv"))
        failures_frame(result.failures).to_csv(paths[-1], index=False, lineterminator="\n")
    return paths
