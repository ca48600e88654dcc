"""Total cost model of a fixed-route line and its (S, f) enumeration optimizer.

All quantities are hourly: ``t_c`` in hours, costs in $/h. The formulas are written with plain
arithmetic so they evaluate on scalars and numpy arrays alike.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from transit_sandbox.core.params import FixedCostParams


@dataclass(frozen=True)
class CostBreakdown:
    t_c: float
    C_o: float
    access: float
    wait: float
    invehicle: float

    @property
    def C_u(self) -> float:
        return self.access + self.wait + self.invehicle

    @property
    def C_t(self) -> float:
        return self.C_o + self.C_u


@dataclass(frozen=True)
class OptimizationResult:
    S: int
    f: float
    C_t: float
    surface: pd.DataFrame
    """Columns ``S, f, C_o, C_u, C_t`` in S-major order."""


def cycle_time(S, f, p: FixedCostParams):
    """One-way cycle time (h): running time, boarding and alighting time and stopping delay."""
    return p.L / p.v_o + p.beta * p.N / f + S * p.t_s


def _components(S, f, p: FixedCostParams):
    t_c = cycle_time(S, f, p)
    operator = p.c * f * t_c
    access = p.P_a * (p.L / (2.0 * p.v_w * S)) * p.N
    wait = p.P_w * (1.0 / (2.0 * f)) * p.N
    invehicle = p.P_v * (p.l / p.L) * t_c * p.N
    return t_c, operator, access, wait, invehicle


def total_cost(S: int, f: float, p: FixedCostParams) -> CostBreakdown:
    """Operator and user cost per hour of a line with ``S`` stops at frequency ``f``."""
    if S < 2 or f <= 0:
        raise ValueError(f"need S >= 2 and f > 0, got S={S}, f={f}")
    return CostBreakdown(*(float(v) for v in _components(S, f, p)))


def frequency_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive frequency grid, rounded to suppress accumulation error."""
    if step <= 0 or stop < start:
        raise ValueError(f"invalid frequency grid start={start} stop={stop} step={step}")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 10)


def cost_surface(p: FixedCostParams, S_range: tuple[int, int], f_grid) -> pd.DataFrame:
    S_values = np.arange(int(S_range[0]), int(S_range[1]) + 1)
    f_values = np.asarray(f_grid, dtype=float)
    if S_values.size == 0 or f_values.size == 0:
        raise ValueError("empty S range or frequency grid")
    if S_values[0] < 2 or np.any(f_values <= 0):
        raise ValueError("S must be >= 2 and every frequency > 0")
    S_mesh, f_mesh = np.meshgrid(S_values, f_values, indexing="ij")
    _, operator, access, wait, invehicle = _components(S_mesh.astype(float), f_mesh, p)
    user = access + wait + invehicle
    return pd.DataFrame(
        {
            "S": S_mesh.ravel(),
            "f": f_mesh.ravel(),
            "C_o": operator.ravel(),
            "C_u": user.ravel(),
            "C_t": (operator + user).ravel(),
        }
    )


def optimize_design(p: FixedCostParams, S_range: tuple[int, int], f_grid) -> OptimizationResult:
    """Exhaustive (S, f) enumeration.

    The surface is laid out S-major with ascending S and f, so the first minimum found by
    ``argmin`` breaks ties toward the smaller S and then the smaller f.
    """
    surface = cost_surface(p, S_range, f_grid)
    best = int(np.argmin(surface["C_t"].to_numpy()))
    row = surface.iloc[best]
    return OptimizationResult(S=int(row["S"]), f=float(row["f"]), C_t=float(row["C_t"]), surface=surface)
