"""TOML configuration of scenarios, system designs and sweeps.

A configuration file holds the three parameter groups of the classified parameter table plus the
sweep and output settings:

.. code-block:: toml

    [simulation]            # sim_length, time_step, metric, drain_limit
    [scenario]              # L, W, v_w, zeta_a, v_o, gamma_v, gamma_w, gamma_a
    [[scenario.demand_levels]]
    id = "low"
    lambda = 80
    [cost]                  # c, P_a, P_w, P_v, beta, t_s, l (hours, km, $/h)
    [[design]]
    id = "fixed_existing"
    type = "fixed"          # fixed | flex | ondemand
    [sweep]                 # seeds, parallelism
    [output]                # out_dir, trace

A fixed design with ``optimize = true`` is resolved per demand level: ``(S, f)`` by exhaustive
enumeration of the total cost model with ``N = lambda`` and ``t_c`` from the cycle time formula.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

import toml

from transit_sandbox.core.geometry import SECONDS_PER_HOUR
from transit_sandbox.core.params import DESIGN_CLASSES, FixedCostParams, FixedDesign, ScenarioParams, SystemDesign
from transit_sandbox.engine.simulator import DEFAULT_DRAIN_LIMIT
from transit_sandbox.errors import ConfigError
from transit_sandbox.policies.fixed.cost_model import OptimizationResult, cycle_time, frequency_grid, optimize_design

logger = logging.getLogger(__name__)

BUNDLED_CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")

DEFAULT_S_RANGE = (2, 80)
DEFAULT_F_GRID = {"start": 0.5, "stop": 6.0, "step": 0.1}

_SECTIONS = {"simulation", "scenario", "cost", "design", "sweep", "output"}
_SIMULATION_KEYS = {"sim_length", "time_step", "metric", "drain_limit"}
_SCENARIO_KEYS = {"L", "W", "v_w", "zeta_a", "v_o", "gamma_v", "gamma_w", "gamma_a", "demand_levels"}
_LEVEL_KEYS = {"id", "lambda"}
_COST_KEYS = {"c", "P_a", "P_w", "P_v", "beta", "t_s", "l"}
_SWEEP_KEYS = {"seeds", "parallelism"}
_OUTPUT_KEYS = {"out_dir", "trace"}
_OPTIMIZE_KEYS = {"optimize", "S_range", "f_grid"}

# notation used in diagnostics for on-disk keys that differ from the field name
_NOTATION = {"lambda": "λ", "zeta_a": "ζ_a", "zeta_w": "ζ_w", "zeta_b": "ζ_b", "zeta_d": "ζ_d", "mu_s": "μ_s"}


@dataclass(frozen=True)
class SweepSpec:
    """Every (scenario, design, seed) combination of a sweep."""

    scenarios: tuple[ScenarioParams, ...]
    designs: Mapping[str, tuple[SystemDesign, ...]]
    """Designs resolved for each scenario id, in configuration order."""
    seeds: tuple[int, ...]
    drain_limit: float = DEFAULT_DRAIN_LIMIT

    @property
    def total_runs(self) -> int:
        """``|seeds| · N_dp · Σ_i N_vs,i``."""
        return len(self.seeds) * sum(len(self.designs[s.scenario_id]) for s in self.scenarios)

    def cells(self) -> Iterator[tuple[ScenarioParams, SystemDesign, int]]:
        """Run combinations ordered by scenario, then design, then seed."""
        for scenario in self.scenarios:
            for design in self.designs[scenario.scenario_id]:
                for seed in self.seeds:
                    yield scenario, design, seed


@dataclass
class SandboxConfig:
    """Validated configuration file.

    The sweep and output settings are mutable so command-line flags can override them.
    """

    name: str
    scenarios: list[ScenarioParams]
    designs: dict[str, list[SystemDesign]]
    cost: dict[str, float] = field(default_factory=dict)
    """Overrides of the fixed-route cost model constants."""
    optimizations: dict[tuple[str, str], OptimizationResult] = field(default_factory=dict)
    """Optimizer result per (scenario id, design id) of every optimized fixed design."""
    seeds: list[int] = field(default_factory=lambda: [0])
    parallelism: int | None = None
    out_dir: str = "outputs"
    trace: bool = False
    drain_limit: float = DEFAULT_DRAIN_LIMIT

    @property
    def design_ids(self) -> list[str]:
        return [design.design_id for design in self.designs[self.scenarios[0].scenario_id]]

    def scenario(self, scenario_id: str | None = None) -> ScenarioParams:
        """Scenario by id; the first demand level when ``scenario_id`` is None."""
        if scenario_id is None:
            return self.scenarios[0]
        for scenario in self.scenarios:
            if scenario.scenario_id == scenario_id:
                return scenario
        known = ", ".join(s.scenario_id for s in self.scenarios)
        raise ConfigError("scenario", None, f"unknown demand level '{scenario_id}' (known: {known})")

    def design(self, design_id: str, scenario_id: str | None = None) -> SystemDesign:
        scenario = self.scenario(scenario_id)
        for design in self.designs[scenario.scenario_id]:
            if design.design_id == design_id:
                return design
        raise ConfigError("design", None, f"unknown design '{design_id}' (known: {', '.join(self.design_ids)})")

    def cost_params(self, scenario: ScenarioParams) -> FixedCostParams:
        return cost_params(scenario, self.cost)

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(
            scenarios=tuple(self.scenarios),
            designs={key: tuple(value) for key, value in self.designs.items()},
            seeds=tuple(self.seeds),
            drain_limit=self.drain_limit,
        )


##
# Loading.
##


def resolve_config_path(path_or_name: str | os.PathLike) -> str:
    """Path of a configuration file, looking up bundled configurations by name."""
    path = os.fspath(path_or_name)
    if os.path.isfile(path):
        return path
    bundled = os.path.join(BUNDLED_CONFIG_DIR, path if path.endswith(".toml") else f"{path}.toml")
    if os.path.isfile(bundled):
        return bundled
    raise ConfigError("config", None, f"no configuration file or bundled configuration named '{path}'")


def bundled_configs() -> list[str]:
    return sorted(name[:-5] for name in os.listdir(BUNDLED_CONFIG_DIR) if name.endswith(".toml"))


def load_config(path_or_name: str | os.PathLike) -> SandboxConfig:
    """Read and validate a configuration file.

    Args:
        path_or_name: A TOML file, or the name of a bundled configuration (e.g. ``"b63_case_study"``).

    Raises:
        ConfigError: On an unknown key, a missing parameter or a value outside its domain.
    """
    path = resolve_config_path(path_or_name)
    try:
        data = toml.load(path)
    except toml.TomlDecodeError as exc:
        raise ConfigError("config", None, f"{path}: {exc}") from None
    name = os.path.splitext(os.path.basename(path))[0]
    config = parse_config(data, name)
    logger.info(
        "Loaded configuration '%s': %d demand levels, %d designs, %d seeds.",
        name,
        len(config.scenarios),
        len(config.design_ids),
        len(config.seeds),
    )
    return config


def parse_config(data: Mapping[str, Any], name: str = "config") -> SandboxConfig:
    """Validate an already parsed configuration mapping."""
    _check_keys(data, _SECTIONS, "top level")
    simulation = _section(data, "simulation", _SIMULATION_KEYS)
    cost = _section(data, "cost", _COST_KEYS)
    sweep = _section(data, "sweep", _SWEEP_KEYS)
    output = _section(data, "output", _OUTPUT_KEYS)

    scenarios = _parse_scenarios(_section(data, "scenario", _SCENARIO_KEYS), simulation)
    entries = data.get("design", [])
    if not isinstance(entries, list) or not entries:
        raise ConfigError("design", None, "at least one [[design]] table is required")

    designs: dict[str, list[SystemDesign]] = {s.scenario_id: [] for s in scenarios}
    optimizations: dict[tuple[str, str], OptimizationResult] = {}
    seen: set[str] = set()
    for index, entry in enumerate(entries):
        design_id = entry.get("id")
        if not isinstance(design_id, str) or not design_id:
            raise ConfigError("id", None, f"[[design]] #{index + 1} needs a non-empty string id")
        if design_id in seen:
            raise ConfigError("id", None, f"duplicate design id '{design_id}'")
        seen.add(design_id)
        for scenario in scenarios:
            design, optimization = _parse_design(entry, scenario, cost)
            designs[scenario.scenario_id].append(design)
            if optimization is not None:
                optimizations[(scenario.scenario_id, design_id)] = optimization

    seeds = sweep.get("seeds", [0])
    if isinstance(seeds, int):
        seeds = [seeds]
    if not seeds or not all(isinstance(s, int) and s >= 0 for s in seeds):
        raise ConfigError("seeds", None, "must be a non-empty list of non-negative integers")
    parallelism = sweep.get("parallelism")
    if parallelism is not None and (not isinstance(parallelism, int) or parallelism < 1):
        raise ConfigError("parallelism", None, "must be a positive integer")
    drain_limit = float(simulation.get("drain_limit", DEFAULT_DRAIN_LIMIT))
    if drain_limit <= 0:
        raise ConfigError("drain_limit", None, "must be strictly positive")

    return SandboxConfig(
        name=name,
        scenarios=scenarios,
        designs=designs,
        cost=dict(cost),
        optimizations=optimizations,
        seeds=list(seeds),
        parallelism=parallelism,
        out_dir=str(output.get("out_dir", "outputs")),
        trace=bool(output.get("trace", False)),
        drain_limit=drain_limit,
    )


def cost_params(scenario: ScenarioParams, cost: Mapping[str, float]) -> FixedCostParams:
    """Cost model inputs of a scenario: ``N = λ`` and the scenario geometry and speeds."""
    return FixedCostParams(N=scenario.lam, L=scenario.L, v_w=scenario.v_w, v_o=scenario.v_o, **cost)


##
# Sections.
##


def _check_keys(table: Mapping[str, Any], allowed: set[str], where: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(key, _NOTATION.get(key), f"unknown key in {where} (allowed: {', '.join(sorted(allowed))})")


def _section(data: Mapping[str, Any], name: str, allowed: set[str]) -> dict[str, Any]:
    table = data.get(name, {})
    if not isinstance(table, Mapping):
        raise ConfigError(name, None, "must be a table")
    _check_keys(table, allowed, f"[{name}]")
    return dict(table)


def _parse_scenarios(table: dict[str, Any], simulation: dict[str, Any]) -> list[ScenarioParams]:
    levels = table.pop("demand_levels", None)
    if not levels:
        raise ConfigError("demand_levels", None, "[scenario] needs at least one [[scenario.demand_levels]] entry")
    base = {**table, **{k: v for k, v in simulation.items() if k != "drain_limit"}}
    scenarios = []
    for level in levels:
        _check_keys(level, _LEVEL_KEYS, "[[scenario.demand_levels]]")
        if "id" not in level or "lambda" not in level:
            raise ConfigError("demand_levels", None, "every demand level needs an id and a lambda")
        scenarios.append(ScenarioParams(scenario_id=str(level["id"]), lam=float(level["lambda"]), **base))
    ids = [s.scenario_id for s in scenarios]
    if len(set(ids)) != len(ids):
        raise ConfigError("demand_levels", None, f"duplicate demand level ids: {ids}")
    return scenarios


def _parse_design(
    entry: Mapping[str, Any], scenario: ScenarioParams, cost: Mapping[str, float]
) -> tuple[SystemDesign, OptimizationResult | None]:
    design_id = entry["id"]
    kind = entry.get("type")
    if kind not in DESIGN_CLASSES:
        raise ConfigError("type", None, f"design '{design_id}': type must be one of {sorted(DESIGN_CLASSES)}")
    cls = DESIGN_CLASSES[kind]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    allowed = (set(fields) - {"design_id"}) | {"id", "type"}
    if cls is FixedDesign:
        allowed |= _OPTIMIZE_KEYS
    _check_keys(entry, allowed, f"[[design]] '{design_id}'")

    values = {k: v for k, v in entry.items() if k not in {"id", "type"} | _OPTIMIZE_KEYS}
    optimization = None
    if cls is FixedDesign:
        if entry.get("optimize", False):
            optimization, values = _optimized_fixed(design_id, entry, values, scenario, cost)
        elif "t_c" not in values and "S" in values:
            # engine geometry: straight run plus one dwell per stop
            values["t_c"] = scenario.L / scenario.v_o * SECONDS_PER_HOUR + values["S"] * values.get("t_d", 20.0)

    missing = [
        name
        for name, f in fields.items()
        if name != "design_id"
        and name not in values
        and f.default is dataclasses.MISSING
        and f.default_factory is dataclasses.MISSING
    ]
    if missing:
        raise ConfigError(missing[0], _NOTATION.get(missing[0]), f"design '{design_id}' is missing {', '.join(missing)}")
    return cls(design_id=design_id, **values), optimization


def _optimized_fixed(
    design_id: str,
    entry: Mapping[str, Any],
    values: dict[str, Any],
    scenario: ScenarioParams,
    cost: Mapping[str, float],
) -> tuple[OptimizationResult, dict[str, Any]]:
    for name in ("S", "f", "t_c", "stop_x"):
        if name in values:
            raise ConfigError(name, name, f"design '{design_id}' is optimized; {name} is chosen by the optimizer")
    S_range = tuple(entry.get("S_range", DEFAULT_S_RANGE))
    if len(S_range) != 2:
        raise ConfigError("S_range", "S", f"design '{design_id}': S_range must be [min, max]")
    grid = {**DEFAULT_F_GRID, **entry.get("f_grid", {})}
    _check_keys(grid, set(DEFAULT_F_GRID), f"f_grid of design '{design_id}'")
    params = cost_params(scenario, cost)
    try:
        result = optimize_design(params, (int(S_range[0]), int(S_range[1])), frequency_grid(**grid))
    except ValueError as exc:
        raise ConfigError("S_range", "S", f"design '{design_id}': {exc}") from None
    t_c = float(cycle_time(result.S, result.f, params)) * SECONDS_PER_HOUR
    logger.debug(
        "Design '%s' at %s: S*=%d f*=%.1f/h t_c=%.0f s, C_t=%.2f $/h.",
        design_id,
        scenario.scenario_id,
        result.S,
        result.f,
        t_c,
        result.C_t,
    )
    return result, {**values, "S": result.S, "f": result.f, "t_c": t_c}


def with_seed(scenario: ScenarioParams, seed: int) -> ScenarioParams:
    return replace(scenario, seed=seed)
