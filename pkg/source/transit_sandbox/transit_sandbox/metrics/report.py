"""Run reports: headline KPIs, post-run audits and comparison tables.

Internally every duration is in seconds and every length in km; reports present weighted travel
time in minutes and VMT in miles.
"""

from __future__ import annotations

import logging
import os
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import pandas as pd

from transit_sandbox.core.geometry import KM_PER_MILE, distance, km_to_miles
from transit_sandbox.core.params import FlexDesign, OnDemandDesign, ScenarioParams, SystemDesign
from transit_sandbox.core.passenger import PassengerState
from transit_sandbox.engine.state import EVENT_COLUMNS, TRACE_COLUMNS, RunResult
from transit_sandbox.engine.vehicle import KinematicState
from transit_sandbox.errors import ReportError, SimulationError
from transit_sandbox.metrics.outcome import PassengerOutcome

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    "design_id",
    "scenario_id",
    "seed",
    "ridership",
    "rejected",
    "avg_wtt_min",
    "vmt_mi",
    "demand_fingerprint",
]
PASSENGER_COLUMNS = [
    "id",
    "served",
    "arrival_s",
    "t_access_s",
    "t_wait_s",
    "t_invehicle_s",
    "t_egress_s",
    "weighted_time_min",
    "vehicle_id",
    "reject_reason",
]
_TOLERANCE = 1e-6


@dataclass
class RunReport:
    design_id: str
    scenario_id: str
    seed: int
    policy: str
    total_ridership: int
    rejected: int
    avg_weighted_travel_time: float | None
    """Mean weighted travel time of served passengers (min); ``None`` when nobody was served."""
    total_vmt: float
    """Vehicle miles travelled inside the demand window."""
    per_passenger: list[PassengerOutcome]
    per_vehicle_vmt: list[float]
    demand_fingerprint: str
    design: SystemDesign
    scenario: ScenarioParams
    counters: dict[str, Any] = field(default_factory=dict)
    result: RunResult | None = field(default=None, repr=False, compare=False)
    """Raw run, kept for trace and event output; dropped when reports cross process boundaries."""

    @property
    def total_vmt_km(self) -> float:
        return self.total_vmt * KM_PER_MILE

    @property
    def demand(self) -> int:
        return self.total_ridership + self.rejected

    def row(self) -> dict[str, Any]:
        return {
            "design_id": self.design_id,
            "scenario_id": self.scenario_id,
            "seed": self.seed,
            "ridership": self.total_ridership,
            "rejected": self.rejected,
            "avg_wtt_min": np.nan if self.avg_weighted_travel_time is None else self.avg_weighted_travel_time,
            "vmt_mi": self.total_vmt,
            "demand_fingerprint": self.demand_fingerprint,
        }

    def detached(self) -> RunReport:
        return replace(self, result=None)


##
# Aggregation.
##


def _conservation_problems(result: RunResult) -> list[str]:
    problems = []
    in_progress = [p.id for p in result.passengers if p.is_active]
    if in_progress:
        problems.append(f"{len(in_progress)} passengers still in progress after the drain: {in_progress[:10]}")
    served = sum(1 for p in result.passengers if p.state is PassengerState.SERVED)
    rejected = sum(1 for p in result.passengers if p.state is PassengerState.REJECTED)
    if served + rejected != len(result.passengers):
        problems.append(f"served {served} + rejected {rejected} != demand {len(result.passengers)}")
    return problems


def aggregate(result: RunResult) -> RunReport:
    """Aggregate a finished run into its report.

    Raises:
        SimulationError: If the passenger conservation audit fails.
    """
    problems = _conservation_problems(result)
    if problems:
        raise SimulationError(f"design '{result.design_id}': conservation audit failed: " + "; ".join(problems))
    gammas = result.scenario.gammas
    outcomes = [PassengerOutcome.from_passenger(p, gammas, result.warmup) for p in result.passengers]
    served = [o.weighted_time for o in outcomes if o.served]
    per_vehicle = [km_to_miles(v.window_km) for v in result.vehicles]
    report = RunReport(
        design_id=result.design_id,
        scenario_id=result.scenario.scenario_id,
        seed=result.seed,
        policy=result.policy,
        total_ridership=len(served),
        rejected=len(outcomes) - len(served),
        avg_weighted_travel_time=float(np.mean(served)) if served else None,
        total_vmt=float(sum(per_vehicle)),
        per_passenger=outcomes,
        per_vehicle_vmt=per_vehicle,
        demand_fingerprint=result.demand_fingerprint,
        design=result.design,
        scenario=result.scenario,
        counters=dict(result.counters),
        result=result,
    )
    logger.info(
        "Report '%s' on '%s' seed=%d: ridership=%d rejected=%d avg_wtt=%s min vmt=%.2f mi.",
        report.design_id,
        report.scenario_id,
        report.seed,
        report.total_ridership,
        report.rejected,
        "n/a" if report.avg_weighted_travel_time is None else f"{report.avg_weighted_travel_time:.2f}",
        report.total_vmt,
    )
    return report


##
# Audits.
##


def _checkpoint_sequence_problems(vid: int, sequence: list[int], count: int) -> list[str]:
    problems = []
    for a, b in zip(sequence, sequence[1:]):
        if abs(a - b) != 1:
            problems.append(f"vehicle {vid}: checkpoint {a} followed by {b}")
    for a, b, c in zip(sequence, sequence[1:], sequence[2:]):
        if 0 < b < count - 1 and c - b != b - a:
            problems.append(f"vehicle {vid}: turned around at checkpoint {b}")
    return problems


def audit_run(result: RunResult) -> list[str]:
    """Check the executed run against the design's service limits.

    Covers capacity, ``ζ_w`` (flex and on-demand), ``ζ_d`` (on-demand), ``ζ_b``, timetable
    adherence and checkpoint order (flex). Returns one message per violation.
    """
    design, scenario = result.design, result.scenario
    problems = _conservation_problems(result)
    capacity = {v.id: v.capacity for v in result.vehicles}
    onboard: dict[int, int] = defaultdict(int)
    checkpoints: dict[int, list[int]] = defaultdict(list)
    for t, event, pid, vid, detail in result.events:
        if event == "board":
            onboard[vid] += 1
            if onboard[vid] > capacity[vid]:
                problems.append(f"t={t}: vehicle {vid} carries {onboard[vid]} > K={capacity[vid]}")
        elif event == "alight":
            onboard[vid] -= 1
        elif event == "arrive" and detail.startswith("checkpoint:"):
            checkpoints[vid].append(int(detail.split(":")[1]))
        elif event == "depart":
            lateness = float(detail.split(",")[1])
            if lateness < -_TOLERANCE:
                problems.append(f"t={t}: vehicle {vid} left checkpoint {detail.split(',')[0]} {-lateness:.0f} s early")
            elif lateness > scenario.time_step + _TOLERANCE:
                problems.append(f"t={t}: vehicle {vid} left checkpoint {detail.split(',')[0]} {lateness:.0f} s late")

    served = [p for p in result.passengers if p.state is PassengerState.SERVED]
    if isinstance(design, (FlexDesign, OnDemandDesign)):
        for p in served:
            if p.t_wait > design.zeta_w + _TOLERANCE:
                problems.append(f"passenger {p.id}: waited {p.t_wait:.0f} s > zeta_w={design.zeta_w:.0f} s")
    if isinstance(design, OnDemandDesign):
        for p in served:
            direct = scenario.direct_ride_time(distance(p.origin, p.destination, scenario.metric))
            if p.t_invehicle > design.zeta_d * direct + _TOLERANCE:
                problems.append(
                    f"passenger {p.id}: rode {p.t_invehicle:.0f} s > zeta_d x direct = {design.zeta_d * direct:.0f} s"
                )
    if isinstance(design, FlexDesign):
        for v in result.vehicles:
            if v.peak_backtrack_km > design.zeta_b + _TOLERANCE:
                problems.append(f"vehicle {v.id}: backtracked {v.peak_backtrack_km:.3f} km > zeta_b={design.zeta_b} km")
        for vid, sequence in checkpoints.items():
            problems.extend(_checkpoint_sequence_problems(vid, sequence, design.S_c))
    return problems


@dataclass(frozen=True)
class VmtCheck:
    stepwise_km: float
    """Sum of per-step displacements."""
    executed_km: float
    """Sum of executed inter-stop leg lengths, the current leg counted up to the vehicle position."""

    def agrees(self, tolerance: float) -> bool:
        return abs(self.stepwise_km - self.executed_km) <= tolerance


def vmt_double_entry(result: RunResult) -> VmtCheck:
    metric = result.scenario.metric
    stepwise = executed = 0.0
    for vehicle in result.vehicles:
        stepwise += vehicle.odometer_km
        legs = sum(vehicle.leg_km)
        if vehicle.kinematic_state is KinematicState.MOVING and vehicle.leg_target is not None:
            legs -= distance(vehicle.position, vehicle.leg_target.location, metric)
        executed += legs
    return VmtCheck(stepwise, executed)


def weighted_times_from_events(events: Sequence[tuple], gammas: tuple[float, float, float]) -> dict[int, float]:
    """Weighted travel time (min) of every served passenger, rebuilt from the event log alone."""
    marks: dict[int, dict[str, float]] = defaultdict(dict)
    for t, event, pid, _, _ in events:
        if pid is None:
            continue
        if event.startswith("assign"):
            event = "assign"
        marks[pid].setdefault(event, t)
    gamma_v, gamma_w, gamma_a = gammas
    times = {}
    for pid, m in marks.items():
        if "served" not in m:
            continue
        access = m["reach"] - m["assign"] if "reach" in m else 0.0
        wait = m["board"] - m["request"] - access
        ride = m["alight"] - m["board"]
        egress = m["served"] - m["alight"]
        times[pid] = (gamma_v * ride + gamma_w * wait + gamma_a * (access + egress)) / 60.0
    return times


def event_log_average(result: RunResult) -> float | None:
    times = weighted_times_from_events(result.events, result.scenario.gammas)
    if not times:
        return None
    return float(np.mean([times[pid] for pid in sorted(times)]))


##
# Comparison tables.
##


def reports_frame(reports: Sequence[RunReport]) -> pd.DataFrame:
    return pd.DataFrame([r.row() for r in reports], columns=REPORT_COLUMNS)


def compare(reports: Sequence[RunReport], baseline: int = 0) -> pd.DataFrame:
    """Side-by-side KPIs with ratios to ``reports[baseline]``.

    Raises:
        ReportError: With fewer than two reports or reports on different demand.
    """
    if len(reports) < 2:
        raise ReportError(f"need at least 2 reports to compare, got {len(reports)}")
    fingerprints = {r.demand_fingerprint for r in reports}
    if len(fingerprints) > 1:
        raise ReportError(
            "reports were produced on different demand: "
            + ", ".join(f"{r.design_id}={r.demand_fingerprint[:12]}" for r in reports)
        )
    frame = reports_frame(reports).drop(columns="demand_fingerprint")
    base = frame.iloc[baseline]
    for column, ratio in (("ridership", "ridership_ratio"), ("avg_wtt_min", "wtt_ratio"), ("vmt_mi", "vmt_ratio")):
        denominator = base[column]
        if pd.isna(denominator) or denominator == 0:
            frame[ratio] = np.nan
        else:
            frame[ratio] = frame[column] / denominator
    return frame


def kpi_table(reports: Sequence[RunReport], value: str) -> pd.DataFrame:
    """Designs by scenario, averaged over seeds, in order of first appearance."""
    frame = reports_frame(reports)
    table = frame.pivot_table(index="design_id", columns="scenario_id", values=value, aggfunc="mean", sort=False)
    return table.reset_index()


def flex_walking_table(reports: Sequence[RunReport]) -> pd.DataFrame:
    """Original (no walking) versus extended flex designs that otherwise match."""
    pairs: dict[tuple, dict[bool, RunReport]] = defaultdict(dict)
    for report in reports:
        if isinstance(report.design, FlexDesign):
            shape = replace(report.design, design_id="", walking_enabled=False)
            pairs[(report.scenario_id, report.seed, shape)][report.design.walking_enabled] = report
    rows = []
    for (scenario_id, seed, shape), variants in pairs.items():
        if len(variants) != 2:
            continue
        original, extended = variants[False], variants[True]
        row = {"scenario_id": scenario_id, "seed": seed, "S_c": shape.S_c}
        for name, attr in (
            ("ridership", "total_ridership"),
            ("avg_wtt_min", "avg_weighted_travel_time"),
            ("vmt_mi", "total_vmt"),
        ):
            before, after = getattr(original, attr), getattr(extended, attr)
            row[f"{name}_original"] = before
            row[f"{name}_extended"] = after
            row[f"{name}_change_pct"] = (
                np.nan if before in (None, 0) or after is None else 100.0 * (after - before) / before
            )
        rows.append(row)
    return pd.DataFrame(rows)


##
# CSV output.
##


def _write(frame: pd.DataFrame, path: str | os.PathLike):
    frame.to_csv(path, index=False, lineterminator="\n")


def write_reports_csv(reports: Sequence[RunReport], path: str | os.PathLike):
    _write(reports_frame(reports), path)


def passengers_frame(report: RunReport) -> pd.DataFrame:
    rows = [
        (
            o.id,
            o.served,
            o.arrival_s,
            o.t_access,
            o.t_wait,
            o.t_invehicle,
            o.t_egress,
            o.weighted_time,
            o.vehicle_id,
            o.reject_reason or "",
        )
        for o in report.per_passenger
    ]
    return pd.DataFrame(rows, columns=PASSENGER_COLUMNS).astype({"vehicle_id": "Int64"})


def events_frame(result: RunResult) -> pd.DataFrame:
    frame = pd.DataFrame(result.events, columns=EVENT_COLUMNS)
    return frame.astype({"passenger_id": "Int64", "vehicle_id": "Int64"})


def trace_frame(result: RunResult) -> pd.DataFrame:
    return pd.DataFrame(result.trace or [], columns=TRACE_COLUMNS)


def write_run_outputs(report: RunReport, out_dir: str | os.PathLike, trace: bool = False) -> list[str]:
    """Write the report, per-passenger and (optionally) event and trace CSVs of one run."""
    os.makedirs(out_dir, exist_ok=True)
    stem = f"{report.design_id}__{report.scenario_id}__seed{report.seed}"
    paths = [os.path.join(out_dir, f"{stem}__report.csv"), os.path.join(out_dir, f"{stem}__passengers.csv")]
    write_reports_csv([report], paths[0])
    _write(passengers_frame(report), paths[1])
    if trace and report.result is not None:
        paths.append(os.path.join(out_dir, f"{stem}__events.csv"))
        _write(events_frame(report.result), paths[-1])
        if report.result.trace is not None:
            paths.append(os.path.join(out_dir, f"{stem}__trace.csv"))
            _write(trace_frame(report.result), paths[-1])
    return paths


def write_comparison_tables(reports: Sequence[RunReport], out_dir: str | os.PathLike) -> list[str]:
    """Ridership, weighted travel time and VMT tables, plus the walking comparison when it applies."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, value in (
        ("ridership_by_design.csv", "ridership"),
        ("avg_wtt_by_design.csv", "avg_wtt_min"),
        ("vmt_by_design.csv", "vmt_mi"),
    ):
        path = os.path.join(out_dir, name)
        _write(kpi_table(reports, value), path)
        paths.append(path)
    walking = flex_walking_table(reports)
    if not walking.empty:
        path = os.path.join(out_dir, "flex_walking_comparison.csv")
        _write(walking, path)
        paths.append(path)
    return paths
