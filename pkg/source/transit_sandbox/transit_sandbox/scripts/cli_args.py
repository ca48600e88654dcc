from __future__ import annotations

import argparse
import logging
from typing import TYPE_CHECKING

from transit_sandbox.errors import ConfigError

if TYPE_CHECKING:
    from transit_sandbox.sweep.config import SandboxConfig

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def add_sandbox_args(parser: argparse.ArgumentParser):
    """Add the configuration and output arguments shared by every command.

    Args:
        parser: The parser to add the arguments to.
    """
    # create a new argument group
    arg_group = parser.add_argument_group("sandbox", description="Configuration and output arguments.")
    # -- configuration arguments
    arg_group.add_argument(
        "--config",
        type=str,
        default="b63_case_study",
        help="Configuration file, or the name of a bundled configuration.",
    )
    arg_group.add_argument("--scenario", type=str, default=None, help="Demand level id (default: all or the first).")
    arg_group.add_argument("--design", type=str, action="append", default=None, help="Design id; repeatable.")
    arg_group.add_argument("--seed", type=int, default=None, help="Seed replacing the configured seed list.")
    arg_group.add_argument("--demand", type=str, default=None, help="Passenger CSV to read or write.")
    # -- output arguments
    arg_group.add_argument("--out-dir", type=str, default=None, help="Directory for CSV and JSON outputs.")
    arg_group.add_argument(
        "--trace", action="store_true", default=None, help="Also write event logs and per-step vehicle traces."
    )
    arg_group.add_argument("--parallelism", type=int, default=None, help="Worker processes of a sweep.")
    arg_group.add_argument(
        "--log-level",
        type=str,
        default="info",
        choices=["debug", "info", "warning", "error"],
        help="Logging verbosity.",
    )


def update_config(cfg: SandboxConfig, args_cli: argparse.Namespace) -> SandboxConfig:
    """Override configuration values with command-line arguments.

    Args:
        cfg: The loaded configuration.
        args_cli: The command line arguments.

    Returns:
        The updated configuration.
    """
    if args_cli.seed is not None:
        cfg.seeds = [args_cli.seed]
    if args_cli.out_dir is not None:
        cfg.out_dir = args_cli.out_dir
    if args_cli.trace is not None:
        cfg.trace = args_cli.trace
    if args_cli.parallelism is not None:
        if args_cli.parallelism < 1:
            raise ConfigError("parallelism", None, "must be a positive integer")
        cfg.parallelism = args_cli.parallelism
    return cfg


def configure_logging(level: str):
    logging.basicConfig(level=getattr(logging, level.upper()), format=LOG_FORMAT, force=True)
