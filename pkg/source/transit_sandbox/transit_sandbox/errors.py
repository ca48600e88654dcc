"""Exception hierarchy of the transit sandbox.

Infeasible insertions are not errors: insertion functions return ``None``. The exceptions below
signal bad inputs (configuration, designs, demand files) or engine bugs caught by the audits.
"""

from __future__ import annotations


class SandboxError(Exception):
    """Base class for every error raised by the sandbox."""


class ConfigError(SandboxError):
    """Invalid or unknown configuration value.

    Args:
        parameter: The configuration key that failed validation.
        notation: The parameter's symbol in the classified parameter table (e.g. ``"ζ_a"``).
        message: Human readable description of the problem.
    """

    def __init__(self, parameter: str, notation: str | None, message: str):
        self.parameter = parameter
        self.notation = notation
        self.message = message
        label = parameter if not notation or notation == parameter else f"{parameter} ({notation})"
        super().__init__(f"{label}: {message}")


class DesignError(ConfigError):
    """A system design that cannot be operated (e.g. negative flex slack)."""


class DemandError(SandboxError):
    """Demand generation or demand file failure.

    Args:
        message: Description of the problem.
        line: 1-based line of the offending row in a demand CSV, if any.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class SimulationError(SandboxError):
    """Engine invariant broken during a run (conservation, capacity, drain limit)."""


class ReportError(SandboxError):
    """Reports cannot be aggregated or compared."""


class DegenerateTripError(SandboxError):
    """A fixed-route trip whose boarding and alighting stops coincide."""
