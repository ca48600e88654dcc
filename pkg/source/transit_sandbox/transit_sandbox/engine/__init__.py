"""Discrete-time engine: route plans, vehicles and run state.

The step loop itself lives in :mod:`transit_sandbox.engine.simulator`, which also resolves the
policy registry and is therefore imported on demand.
"""

from .plan import Kinematics, PlanAnchor, Projection, RoutePlan, RouteStop, StopKind, project, steps_for_distance
from .state import EngineState, RunResult
from .vehicle import KinematicState, Vehicle
