"""Geometry, parameter classes, passengers and demand."""

from .demand import demand_fingerprint, generate_passengers, read_demand_csv, write_demand_csv
from .geometry import Direction, Metric, Point, distance, rect_distance, walk_time
from .params import (
    FixedCostParams,
    FixedDesign,
    FlexDesign,
    InsertionObjective,
    OnDemandDesign,
    ScenarioParams,
    SystemDesign,
)
from .passenger import Passenger, PassengerState
