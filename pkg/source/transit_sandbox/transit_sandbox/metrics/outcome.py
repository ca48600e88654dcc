from __future__ import annotations

from dataclasses import dataclass, replace

from transit_sandbox.core.passenger import Passenger, PassengerState


@dataclass(frozen=True)
class PassengerOutcome:
    """Completed timing ledger of one passenger. Durations in seconds."""

    id: int
    served: bool
    t_access: float
    t_wait: float
    t_invehicle: float
    t_egress: float
    weighted_time: float | None
    """Weighted travel time (min); ``None`` for passengers who were not served."""
    arrival_s: float = 0.0
    vehicle_id: int | None = None
    reject_reason: str | None = None

    @classmethod
    def from_passenger(cls, passenger: Passenger, gammas: tuple[float, float, float], time_offset: float = 0.0):
        served = passenger.state is PassengerState.SERVED
        outcome = cls(
            id=passenger.id,
            served=served,
            t_access=passenger.t_access,
            t_wait=passenger.t_wait,
            t_invehicle=passenger.t_invehicle,
            t_egress=passenger.t_egress,
            weighted_time=None,
            arrival_s=passenger.arrival_time - time_offset,
            vehicle_id=passenger.assigned_vehicle if served else None,
            reject_reason=passenger.reject_reason,
        )
        if not served:
            return outcome
        gamma_v, gamma_w, gamma_a = gammas
        return replace(outcome, weighted_time=weighted_travel_time(outcome, gamma_v, gamma_w, gamma_a))


def weighted_travel_time(outcome: PassengerOutcome, gamma_v: float, gamma_w: float, gamma_a: float) -> float:
    """``γ_v·t_invehicle + γ_w·t_wait + γ_a·(t_access + t_egress)`` in minutes."""
    seconds = (
        gamma_v * outcome.t_invehicle + gamma_w * outcome.t_wait + gamma_a * (outcome.t_access + outcome.t_egress)
    )
    return seconds / 60.0
