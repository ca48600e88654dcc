"""Fixed-route operation and the stop-count / frequency optimizer."""

from .cost_model import CostBreakdown, OptimizationResult, cost_surface, cycle_time, optimize_design, total_cost
from .layout import FixedAssignment, FixedLayout, assign_fixed, line_positions
