"""Flexible route with checkpoints, slack-budgeted deviations and passenger walking."""

from .insertion import (
    FlexCandidate,
    InsertionMode,
    direct_insertion,
    insertion_section,
    passenger_direction,
    search_insertion,
    walking_insertion,
)
from .timetable import FlexSegment, FlexTimetable, init_flex, segment_ledger, segment_timing
