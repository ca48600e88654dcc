"""Seeded demand generation and the demand CSV exchange format.

Arrival times are relative to the start of the demand window. The CSV has the header
``id,arrival_s,ox_km,oy_km,dx_km,dy_km`` (UTF-8, LF line endings).
"""

from __future__ import annotations

import hashlib
import logging
import math
import os

import numpy as np
import pandas as pd

from transit_sandbox.core.geometry import EPS, SECONDS_PER_HOUR, Point, distance
from transit_sandbox.core.params import ScenarioParams
from transit_sandbox.core.passenger import Passenger
from transit_sandbox.errors import DemandError

logger = logging.getLogger(__name__)

DEMAND_COLUMNS = ["id", "arrival_s", "ox_km", "oy_km", "dx_km", "dy_km"]
MAX_OD_RETRIES = 10_000


def _arrival_times(rng: np.random.Generator, rate_per_s: float, t_start: float, t_end: float) -> np.ndarray:
    """Poisson arrival epochs on ``[t_start, t_end)`` from exponential inter-arrival gaps."""
    mean_gap = 1.0 / rate_per_s
    batch = max(16, int(1.2 * (t_end - t_start) * rate_per_s) + 16)
    times: list[np.ndarray] = []
    last = t_start
    while True:
        epochs = last + np.cumsum(rng.exponential(mean_gap, size=batch))
        inside = epochs[epochs < t_end]
        times.append(inside)
        if inside.size < epochs.size:
            break
        last = float(epochs[-1])
    return np.concatenate(times)


def generate_passengers(scenario: ScenarioParams, t_start: float, t_end: float) -> list[Passenger]:
    """Generate the passengers arriving during ``[t_start, t_end)``.

    Arrival epochs form a Poisson process of rate ``scenario.lam`` floored to the time step.
    Origins and destinations are uniform over the region; pairs within walking distance
    (``distance <= ζ_a``) are redrawn.

    Args:
        scenario: Scenario parameters, including the seed.
        t_start: Window start (s).
        t_end: Window end (s).

    Returns:
        Passengers sorted by arrival time, with ids ``0..n-1`` in that order.

    Raises:
        DemandError: If the window is empty or an OD pair cannot be drawn within the retry cap.
    """
    if not t_start < t_end:
        raise DemandError(f"empty demand window [{t_start}, {t_end})")
    if scenario.lam == 0:
        return []
    # independent streams so changing the window does not reshuffle locations
    arrival_seed, od_seed = np.random.SeedSequence(scenario.seed).spawn(2)
    arrivals = _arrival_times(np.random.default_rng(arrival_seed), scenario.lam / SECONDS_PER_HOUR, t_start, t_end)
    dt = scenario.time_step
    arrivals = t_start + np.floor((arrivals - t_start) / dt + EPS) * dt

    od_rng = np.random.default_rng(od_seed)
    scale = np.array([scenario.L, scenario.W, scenario.L, scenario.W])
    passengers = []
    for pid, arrival in enumerate(arrivals):
        for _ in range(MAX_OD_RETRIES):
            ox, oy, dx, dy = od_rng.random(4) * scale
            origin, destination = Point(float(ox), float(oy)), Point(float(dx), float(dy))
            if distance(origin, destination, scenario.metric) > scenario.zeta_a:
                break
        else:
            raise DemandError(
                f"no OD pair farther apart than zeta_a={scenario.zeta_a} km after {MAX_OD_RETRIES} draws; "
                f"the region {scenario.L} x {scenario.W} km is too small"
            )
        passengers.append(Passenger(pid, float(arrival), origin, destination))
    logger.debug("Generated %d passengers for scenario '%s' (seed=%d).", len(passengers), scenario.scenario_id, scenario.seed)
    return passengers


##
# CSV exchange format.
##


def demand_to_frame(passengers: list[Passenger]) -> pd.DataFrame:
    rows = [
        (p.id, p.arrival_time, p.origin.x, p.origin.y, p.destination.x, p.destination.y) for p in passengers
    ]
    frame = pd.DataFrame(rows, columns=DEMAND_COLUMNS)
    return frame.astype({"id": "int64"})


def demand_csv_text(passengers: list[Passenger]) -> str:
    """Canonical CSV serialization of a passenger list."""
    return demand_to_frame(passengers).to_csv(index=False, lineterminator="\n")


def write_demand_csv(passengers: list[Passenger], path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as stream:
        stream.write(demand_csv_text(passengers))


def demand_fingerprint(passengers: list[Passenger]) -> str:
    """SHA-256 of the canonical demand CSV; equal lists share a fingerprint."""
    return hashlib.sha256(demand_csv_text(passengers).encode("utf-8")).hexdigest()


def read_demand_csv(path: str | os.PathLike, scenario: ScenarioParams) -> tuple[list[Passenger], list[str]]:
    """Read an exogenous demand list.

    Rows with arrivals outside ``[0, sim_length)``, points outside the region, duplicate ids or
    unparsable values are errors. Rows whose OD pair is within walking distance are kept and
    reported as warnings.

    Returns:
        The passengers sorted by (arrival, id) and the list of warning messages.

    Raises:
        DemandError: On a malformed file; ``line`` names the offending CSV line.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DemandError(f"cannot read demand file {path}: {exc}") from exc
    if list(frame.columns) != DEMAND_COLUMNS:
        raise DemandError(f"expected header {','.join(DEMAND_COLUMNS)}, got {','.join(frame.columns)}", line=1)

    passengers: list[Passenger] = []
    warnings: list[str] = []
    seen: set[int] = set()
    for index, row in enumerate(frame.itertuples(index=False)):
        line = index + 2
        try:
            pid = int(row.id)
            arrival, ox, oy, dx, dy = (float(v) for v in (row.arrival_s, row.ox_km, row.oy_km, row.dx_km, row.dy_km))
        except ValueError as exc:
            raise DemandError(f"unparsable value ({exc})", line=line) from exc
        if not all(math.isfinite(v) for v in (arrival, ox, oy, dx, dy)):
            raise DemandError("non-finite value", line=line)
        if pid in seen:
            raise DemandError(f"duplicate passenger id {pid}", line=line)
        seen.add(pid)
        if not 0.0 <= arrival < scenario.sim_length:
            raise DemandError(f"arrival {arrival} s outside the demand window [0, {scenario.sim_length})", line=line)
        origin, destination = Point(ox, oy), Point(dx, dy)
        for label, point in (("origin", origin), ("destination", destination)):
            if not point.inside(scenario.L, scenario.W):
                raise DemandError(f"{label} ({point.x}, {point.y}) outside the {scenario.L} x {scenario.W} km region", line=line)
        if distance(origin, destination, scenario.metric) <= scenario.zeta_a:
            message = f"line {line}: passenger {pid} OD within walking distance (zeta_a={scenario.zeta_a} km), kept"
            logger.warning(message)
            warnings.append(message)
        passengers.append(Passenger(pid, arrival, origin, destination))
    passengers.sort(key=lambda p: (p.arrival_time, p.id))
    return passengers, warnings
