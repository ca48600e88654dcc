"""
Script to print all the system designs of a configuration.

The script iterates over the designs of one demand level and stores the details in a table.
It prints the design id, the policy operating it, the fleet and the key design parameters.
"""

from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence

from prettytable import PrettyTable

from transit_sandbox.core.params import FixedDesign, FlexDesign, SystemDesign
from transit_sandbox.errors import ConfigError
from transit_sandbox.policies import registry
from transit_sandbox.sweep.config import load_config


def design_summary(design: SystemDesign) -> str:
    if isinstance(design, FixedDesign):
        return f"S={design.S}, f={design.f:g}/h, t_c={design.t_c / 60:.1f} min"
    if isinstance(design, FlexDesign):
        mode = "extended" if design.walking_enabled else "original"
        return f"S_c={design.S_c}, f={design.f:g}/h, t_c={design.t_c / 60:.0f} min, zeta_b={design.zeta_b} km, {mode}"
    return f"S_d={design.S_d}, mu_s={list(design.mu_s)}, zeta_w={design.zeta_w / 60:.0f} min, zeta_d={design.zeta_d:g}"


def main(argv: Sequence[str] | None = None) -> int:
    """Print the designs of a configuration."""
    parser = argparse.ArgumentParser(description="List the system designs of a configuration.")
    parser.add_argument("--config", type=str, default="b63_case_study", help="Configuration file or bundled name.")
    parser.add_argument("--scenario", type=str, default=None, help="Demand level id (default: the first).")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        scenario = cfg.scenario(args.scenario)
    except ConfigError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        return 2

    table = PrettyTable(["S. No.", "Design", "Policy", "V", "K", "Parameters"])
    table.title = f"Designs of '{cfg.name}' at demand level '{scenario.scenario_id}' (λ={scenario.lam:g}/h)"
    # set alignment of table columns
    table.align["Design"] = "l"
    table.align["Policy"] = "l"
    table.align["Parameters"] = "l"
    for index, design in enumerate(cfg.designs[scenario.scenario_id]):
        label = registry[design.kind].kwargs.get("label", design.kind)
        table.add_row([index + 1, design.design_id, label, design.V, design.K, design_summary(design)])
    print(table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
