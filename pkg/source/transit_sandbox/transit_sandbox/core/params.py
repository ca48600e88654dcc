"""Configuration classes for scenarios and system designs.

Each parameter group of the classified parameter table is a frozen dataclass whose
``__post_init__`` validates it. Field names follow the ASCII form of the notation
(``lam`` for λ, ``zeta_a`` for ζ_a, ``S_c`` ...). Durations are seconds, lengths km, speeds km/h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Union

from transit_sandbox.core.geometry import EPS, SECONDS_PER_HOUR, Metric
from transit_sandbox.errors import ConfigError, DesignError


def _require(condition: bool, parameter: str, notation: str | None, message: str, error=ConfigError):
    if not condition:
        raise error(parameter, notation, message)


def ceil_step(duration: float, time_step: float) -> float:
    """Round a duration up to the simulation time grid."""
    return max(0, math.ceil(duration / time_step - EPS)) * time_step


##
# Scenario.
##


@dataclass(frozen=True)
class ScenarioParams:
    """Scenario and simulation parameters shared by every design."""

    scenario_id: str = "default"
    """Label used in reports."""
    L: float = 13.12
    """Route length (km)."""
    W: float = 1.6
    """Service region width (km)."""
    lam: float = 80.0
    """Passenger arrival rate λ (passengers/h)."""
    v_w: float = 5.0
    """Walking speed (km/h)."""
    zeta_a: float = 0.8
    """Maximum walking distance ζ_a (km)."""
    v_o: float = 11.41
    """Vehicle running speed (km/h)."""
    gamma_v: float = 1.0
    gamma_w: float = 1.59
    gamma_a: float = 1.79
    sim_length: float = 14400.0
    """Length of the demand window (s)."""
    time_step: float = 1.0
    """Simulation time step (s)."""
    seed: int = 0
    metric: Metric = Metric.RECTILINEAR

    def __post_init__(self):
        for name, notation in (("L", "L"), ("W", "W"), ("v_w", "v_w"), ("zeta_a", "ζ_a"), ("v_o", "v_o")):
            _require(getattr(self, name) > 0, name, notation, "must be strictly positive")
        _require(self.lam >= 0, "lambda", "λ", "must be non-negative")
        for name in ("gamma_v", "gamma_w", "gamma_a"):
            _require(getattr(self, name) >= 0, name, "γ_" + name[-1], "must be non-negative")
        _require(self.time_step > 0, "time_step", "Δt", "must be strictly positive")
        _require(self.sim_length > 0, "sim_length", None, "must be strictly positive")
        ratio = self.sim_length / self.time_step
        _require(abs(ratio - round(ratio)) < 1e-6, "time_step", "Δt", "must divide sim_length")
        # allow strings from config files
        object.__setattr__(self, "metric", Metric(self.metric))

    @property
    def step_km(self) -> float:
        """Distance a vehicle covers in one time step."""
        return self.v_o * self.time_step / SECONDS_PER_HOUR

    @property
    def gammas(self) -> tuple[float, float, float]:
        return self.gamma_v, self.gamma_w, self.gamma_a

    def direct_ride_time(self, km: float) -> float:
        """Continuous in-vehicle time (s) for ``km`` of driving."""
        return km / self.v_o * SECONDS_PER_HOUR


##
# System designs.
##


class InsertionObjective(str, Enum):
    """Objective of the on-demand insertion heuristic."""

    VEHICLE_TIME = "vehicle-time"
    WEIGHTED_PASSENGER_TIME = "weighted-passenger-time"


def _validate_fleet(design) -> None:
    _require(design.V >= 1, "V", "V", "fleet size must be at least 1", DesignError)
    _require(design.K >= 1, "K", "K", "capacity must be at least 1", DesignError)
    _require(design.t_d >= 0, "t_d", "t_d", "dwell time must be non-negative", DesignError)


@dataclass(frozen=True)
class FixedDesign:
    """Fixed-route line with ``S`` stops served at frequency ``f``."""

    kind: ClassVar[str] = "fixed"

    design_id: str
    S: int
    f: float
    V: int
    K: int
    t_c: float
    """One-way cycle time (s); drives warm-up and the number of vehicles in service."""
    t_d: float = 20.0
    stop_x: tuple[float, ...] | None = None
    """Optional explicit stop abscissae (km) for irregular spacing."""

    def __post_init__(self):
        _require(self.S >= 2, "S", "S", "a line needs at least 2 stops", DesignError)
        _require(self.f > 0, "f", "f", "frequency must be strictly positive", DesignError)
        _require(self.t_c > 0, "t_c", "t_c", "cycle time must be strictly positive", DesignError)
        _validate_fleet(self)
        if self.stop_x is not None:
            xs = tuple(float(x) for x in self.stop_x)
            _require(len(xs) == self.S, "stop_x", None, f"expected {self.S} stop positions, got {len(xs)}", DesignError)
            _require(
                all(a < b for a, b in zip(xs, xs[1:])), "stop_x", None, "stop positions must increase", DesignError
            )
            object.__setattr__(self, "stop_x", xs)

    @property
    def headway(self) -> float:
        """Dispatch headway (s)."""
        return SECONDS_PER_HOUR / self.f


@dataclass(frozen=True)
class FlexDesign:
    """Checkpoint-based flexible route with slack-budgeted deviations."""

    kind: ClassVar[str] = "flex"

    design_id: str
    S_c: int
    f: float
    V: int
    K: int
    t_c: float
    zeta_w: float
    """Maximum wait ζ_w (s)."""
    zeta_b: float
    """Maximum backtracking per checkpoint section ζ_b (km)."""
    t_d: float = 20.0
    walking_enabled: bool = True
    """Passenger walking to and from the route (extended mode)."""
    retry_interval: float = 30.0
    """Cadence (s) at which pooled requests are re-evaluated."""

    def __post_init__(self):
        _require(self.S_c >= 2, "S_c", "S_c", "at least 2 checkpoints are required", DesignError)
        _require(self.f > 0, "f", "f", "frequency must be strictly positive", DesignError)
        _require(self.t_c > 0, "t_c", "t_c", "cycle time must be strictly positive", DesignError)
        _require(self.zeta_w > 0, "zeta_w", "ζ_w", "must be strictly positive", DesignError)
        _require(self.zeta_b >= 0, "zeta_b", "ζ_b", "must be non-negative", DesignError)
        _require(self.retry_interval > 0, "retry_interval", None, "must be strictly positive", DesignError)
        _validate_fleet(self)

    @property
    def headway(self) -> float:
        return SECONDS_PER_HOUR / self.f


@dataclass(frozen=True)
class OnDemandDesign:
    """Door-to-door on-demand service from ``S_d`` depots."""

    kind: ClassVar[str] = "ondemand"

    design_id: str
    S_d: int
    V: int
    K: int
    zeta_w: float
    zeta_d: float
    """Maximum ratio of ride time to direct ride time ζ_d."""
    t_d: float = 20.0
    mu_s: tuple[int, ...] | None = None
    """Vehicles per depot; ``None`` spreads the fleet evenly, lower depots first."""
    objective: InsertionObjective = InsertionObjective.VEHICLE_TIME

    def __post_init__(self):
        _require(self.S_d >= 1, "S_d", "S_d", "at least 1 depot is required", DesignError)
        _require(self.zeta_w > 0, "zeta_w", "ζ_w", "must be strictly positive", DesignError)
        _require(self.zeta_d >= 1, "zeta_d", "ζ_d", "must be at least 1", DesignError)
        _validate_fleet(self)
        if self.mu_s is None:
            base, extra = divmod(self.V, self.S_d)
            mu = tuple(base + (1 if i < extra else 0) for i in range(self.S_d))
        else:
            mu = tuple(int(n) for n in self.mu_s)
        _require(len(mu) == self.S_d, "mu_s", "μ_s", f"expected {self.S_d} depot counts, got {len(mu)}", DesignError)
        _require(all(n >= 0 for n in mu), "mu_s", "μ_s", "depot counts must be non-negative", DesignError)
        _require(sum(mu) == self.V, "mu_s", "μ_s", f"depot counts sum to {sum(mu)}, expected V={self.V}", DesignError)
        object.__setattr__(self, "mu_s", mu)
        object.__setattr__(self, "objective", InsertionObjective(self.objective))


SystemDesign = Union[FixedDesign, FlexDesign, OnDemandDesign]

DESIGN_CLASSES: dict[str, type] = {cls.kind: cls for cls in (FixedDesign, FlexDesign, OnDemandDesign)}


@dataclass(frozen=True)
class FixedCostParams:
    """Inputs of the fixed-route total cost model (hours, km, $)."""

    N: float
    """Passenger demand (passengers/h)."""
    L: float
    v_w: float
    v_o: float
    c: float = 120.0
    P_a: float = 25.0
    P_w: float = 20.0
    P_v: float = 12.0
    beta: float = 10.0 / 3600.0
    """Boarding and alighting time per passenger (h)."""
    t_s: float = 20.0 / 3600.0
    """Stopping delay per stop (h)."""
    l: float | None = None
    """Average trip length (km); defaults to ``L / 2``."""

    def __post_init__(self):
        if self.l is None:
            object.__setattr__(self, "l", self.L / 2.0)
        for name in ("N", "L", "v_w", "v_o", "c", "P_a", "P_w", "P_v", "beta", "t_s", "l"):
            _require(getattr(self, name) > 0, name, name, "must be strictly positive")
        _require(self.l <= self.L + EPS, "l", "l", "average trip length cannot exceed L")
