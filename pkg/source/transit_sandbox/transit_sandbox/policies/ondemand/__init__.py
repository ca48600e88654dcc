"""On-demand microtransit: depot fleet and request-time insertion."""

from .insertion import InsertionStats, OnDemandCandidate, insert_ondemand
