"""
Command-line entry point of the transit sandbox.

Subcommands:

* ``gen-demand``: write the passenger CSV of each demand level and seed.
* ``run``: simulate one design and write its report, passenger and optional trace CSVs.
* ``optimize-fixed``: enumerate the fixed-route (S, f) cost surface of each demand level.
* ``sweep``: run every (demand level, design, seed) combination and the comparison tables.
* ``compare``: run several designs on one shared demand list and tabulate their ratios.

Every invocation writes a JSON summary to the output directory. Exit codes: 0 on success, 2 on a
configuration, design or demand file error, 3 when a run fails or breaks a service limit.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Sequence

import pandas as pd
from prettytable import PrettyTable

from transit_sandbox.core.demand import demand_fingerprint, generate_passengers, read_demand_csv, write_demand_csv
from transit_sandbox.core.geometry import SECONDS_PER_HOUR
from transit_sandbox.errors import ConfigError, DemandError, SandboxError
from transit_sandbox.metrics.report import audit_run, compare, kpi_table, vmt_double_entry, write_run_outputs
from transit_sandbox.policies.fixed.cost_model import frequency_grid, optimize_design, total_cost
from transit_sandbox.scripts import cli_args
from transit_sandbox.sweep.config import DEFAULT_F_GRID, DEFAULT_S_RANGE, SandboxConfig, load_config, with_seed
from transit_sandbox.sweep.runner import run_single, run_sweep, write_sweep_outputs

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN = 3

# tolerance of the VMT double entry (km)
_VMT_TOLERANCE = 1e-6


def frame_table(frame: pd.DataFrame, title: str, float_format: str = ".2f") -> PrettyTable:
    """Render a data frame as a left-aligned text table."""
    table = PrettyTable([str(c) for c in frame.columns])
    table.title = title
    table.align[str(frame.columns[0])] = "l"
    for row in frame.itertuples(index=False):
        table.add_row([format(v, float_format) if isinstance(v, float) else v for v in row])
    return table


def _write_summary(cfg: SandboxConfig, command: str, summary: dict) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"{command.replace('-', '_')}_summary.json")
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(summary, stream, indent=2, sort_keys=True, default=str)
        stream.write("\n")
    logger.info("Summary written to %s.", path)
    return path


def _demand(cfg: SandboxConfig, args: argparse.Namespace, scenario_id: str | None):
    """Demand of a single run: the CSV given with ``--demand``, else generated from the first seed."""
    scenario = with_seed(cfg.scenario(scenario_id), cfg.seeds[0])
    if args.demand is None:
        return scenario, generate_passengers(scenario, 0.0, scenario.sim_length), []
    passengers, warnings = read_demand_csv(args.demand, scenario)
    logger.info("Read %d passengers from %s.", len(passengers), args.demand)
    return scenario, passengers, warnings


##
# Commands.
##


def cmd_gen_demand(cfg: SandboxConfig, args: argparse.Namespace) -> int:
    scenarios = [cfg.scenario(args.scenario)] if args.scenario else cfg.scenarios
    if args.demand is not None and len(scenarios) * len(cfg.seeds) > 1:
        raise ConfigError("demand", None, "--demand names one file; select one demand level and one seed")
    os.makedirs(cfg.out_dir, exist_ok=True)
    files = []
    for scenario in scenarios:
        for seed in cfg.seeds:
            seeded = with_seed(scenario, seed)
            passengers = generate_passengers(seeded, 0.0, seeded.sim_length)
            path = args.demand or os.path.join(cfg.out_dir, f"demand__{scenario.scenario_id}__seed{seed}.csv")
            write_demand_csv(passengers, path)
            files.append(
                {
                    "scenario_id": scenario.scenario_id,
                    "seed": seed,
                    "path": path,
                    "passengers": len(passengers),
                    "demand_fingerprint": demand_fingerprint(passengers),
                }
            )
            logger.info("Wrote %d passengers to %s.", len(passengers), path)
    _write_summary(cfg, "gen-demand", {"command": "gen-demand", "config": cfg.name, "files": files})
    return EXIT_OK


def cmd_run(cfg: SandboxConfig, args: argparse.Namespace) -> int:
    if not args.design or len(args.design) != 1:
        raise ConfigError("design", None, "run needs exactly one --design")
    scenario, passengers, warnings = _demand(cfg, args, args.scenario)
    design = cfg.design(args.design[0], scenario.scenario_id)
    report = run_single(scenario, design, scenario.seed, passengers, trace=cfg.trace, drain_limit=cfg.drain_limit)
    problems = audit_run(report.result)
    vmt = vmt_double_entry(report.result)
    if not vmt.agrees(_VMT_TOLERANCE):
        problems.append(f"VMT double entry differs: {vmt.stepwise_km:.6f} vs {vmt.executed_km:.6f} km")
    for problem in problems:
        logger.error("Audit: %s", problem)
    paths = write_run_outputs(report, cfg.out_dir, trace=cfg.trace)

    print(frame_table(pd.DataFrame([report.row()]).drop(columns="demand_fingerprint"), f"Run of '{design.design_id}'"))
    _write_summary(
        cfg,
        "run",
        {
            "command": "run",
            "config": cfg.name,
            "report": report.row(),
            "counters": report.counters,
            "demand_warnings": warnings,
            "audit_problems": problems,
            "files": paths,
        },
    )
    return EXIT_RUN if problems else EXIT_OK


def cmd_optimize_fixed(cfg: SandboxConfig, args: argparse.Namespace) -> int:
    scenarios = [cfg.scenario(args.scenario)] if args.scenario else cfg.scenarios
    table = PrettyTable(["Demand level", "λ (pax/h)", "Design", "S*", "f* (veh/h)", "t_c (min)", "C_o", "C_u", "C_t"])
    table.title = "Fixed-route (S, f) optimum"
    table.align["Demand level"] = "l"
    table.align["Design"] = "l"
    os.makedirs(cfg.out_dir, exist_ok=True)
    rows = []
    for scenario in scenarios:
        params = cfg.cost_params(scenario)
        results = {did: res for (sid, did), res in cfg.optimizations.items() if sid == scenario.scenario_id}
        if not results:
            results = {"default": optimize_design(params, DEFAULT_S_RANGE, frequency_grid(**DEFAULT_F_GRID))}
        for design_id, result in results.items():
            cost = total_cost(result.S, result.f, params)
            path = os.path.join(cfg.out_dir, f"fixed_cost_surface__{scenario.scenario_id}__{design_id}.csv")
            result.surface.to_csv(path, index=False, lineterminator="\n")
            table.add_row(
                [
                    scenario.scenario_id,
                    f"{scenario.lam:g}",
                    design_id,
                    result.S,
                    f"{result.f:.1f}",
                    f"{cost.t_c * 60:.1f}",
                    f"{cost.C_o:.2f}",
                    f"{cost.C_u:.2f}",
                    f"{cost.C_t:.2f}",
                ]
            )
            rows.append(
                {
                    "scenario_id": scenario.scenario_id,
                    "design_id": design_id,
                    "S": result.S,
                    "f": result.f,
                    "t_c_s": cost.t_c * SECONDS_PER_HOUR,
                    "C_o": cost.C_o,
                    "C_u": cost.C_u,
                    "C_t": cost.C_t,
                    "surface": path,
                }
            )
    print(table)
    _write_summary(cfg, "optimize-fixed", {"command": "optimize-fixed", "config": cfg.name, "optima": rows})
    return EXIT_OK


def cmd_sweep(cfg: SandboxConfig, args: argparse.Namespace) -> int:
    spec = cfg.sweep_spec()
    result = run_sweep(spec, cfg.parallelism, run_dir=os.path.join(cfg.out_dir, "runs"), trace=cfg.trace)
    paths = write_sweep_outputs(result, cfg.out_dir)
    if result.reports:
        for value, title in (
            ("ridership", "Total ridership"),
            ("avg_wtt_min", "Average weighted travel time (min)"),
            ("vmt_mi", "Total VMT (mi)"),
        ):
            print(frame_table(kpi_table(result.reports, value), title))
    for failure in result.failures:
        logger.error("Failed: %s on %s seed=%d: %s", failure.design_id, failure.scenario_id, failure.seed, failure.error)
    _write_summary(
        cfg,
        "sweep",
        {
            "command": "sweep",
            "config": cfg.name,
            "total_runs": spec.total_runs,
            "completed": len(result.reports),
            "failures": [vars(f) for f in result.failures],
            "files": paths,
        },
    )
    return EXIT_OK if result.ok else EXIT_RUN


def cmd_compare(cfg: SandboxConfig, args: argparse.Namespace) -> int:
    scenario, passengers, warnings = _demand(cfg, args, args.scenario)
    design_ids = args.design or [d.design_id for d in cfg.designs[scenario.scenario_id]]
    if len(design_ids) < 2:
        raise ConfigError("design", None, "compare needs at least two designs")
    designs = [cfg.design(design_id, scenario.scenario_id) for design_id in design_ids]
    reports = [
        run_single(scenario, design, scenario.seed, passengers, drain_limit=cfg.drain_limit) for design in designs
    ]
    frame = compare(reports)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, f"comparison__{scenario.scenario_id}__seed{scenario.seed}.csv")
    frame.to_csv(path, index=False, lineterminator="\n")
    print(frame_table(frame, f"Designs on '{scenario.scenario_id}' relative to '{design_ids[0]}'"))
    _write_summary(
        cfg,
        "compare",
        {
            "command": "compare",
            "config": cfg.name,
            "baseline": design_ids[0],
            "rows": frame.to_dict(orient="records"),
            "demand_warnings": warnings,
            "files": [path],
        },
    )
    return EXIT_OK


COMMANDS = {
    "gen-demand": (cmd_gen_demand, "Write the passenger CSV of each demand level and seed."),
    "run": (cmd_run, "Simulate one design."),
    "optimize-fixed": (cmd_optimize_fixed, "Enumerate the fixed-route cost surface."),
    "sweep": (cmd_sweep, "Run every demand level, design and seed."),
    "compare": (cmd_compare, "Compare designs on one shared demand list."),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    cli_args.add_sandbox_args(common)
    parser = argparse.ArgumentParser(prog="transit-sandbox", description="Simulate and compare transit designs.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the process exit code."""
    args = build_parser().parse_args(argv)
    cli_args.configure_logging(args.log_level)
    command, _ = COMMANDS[args.command]
    try:
        cfg = cli_args.update_config(load_config(args.config), args)
        return command(cfg, args)
    except (ConfigError, DemandError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except SandboxError as exc:
        logger.error("%s", exc)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
