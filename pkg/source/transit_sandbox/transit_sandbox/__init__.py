"""
Python module for the transit_sandbox extension.

Simulation sandbox comparing fixed-route, flexible-route (checkpoint deviation) and on-demand
microtransit operating policies on a rectangular service region.
"""

from .errors import ConfigError, DemandError, DesignError, ReportError, SandboxError, SimulationError

__version__ = "0.1.0"
