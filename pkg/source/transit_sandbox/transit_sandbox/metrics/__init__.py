"""Per-passenger outcomes, run reports, audits and comparison tables."""

from .outcome import PassengerOutcome, weighted_travel_time
from .report import RunReport, aggregate, audit_run, compare, event_log_average, vmt_double_entry
