"""Configuration files and batch sweeps."""

from .config import SandboxConfig, SweepSpec, bundled_configs, load_config, parse_config
from .runner import RunFailure, SweepResult, run_single, run_sweep, sweep_demand, write_sweep_outputs
