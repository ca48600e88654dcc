"""
Operating policies and their registry.
"""

from __future__ import annotations

import importlib
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from transit_sandbox.errors import ConfigError

if TYPE_CHECKING:
    from transit_sandbox.core.params import ScenarioParams, SystemDesign
    from transit_sandbox.policies.base import Policy


@dataclass(frozen=True)
class PolicySpec:
    id: str
    entry_point: str
    kwargs: dict[str, Any] = field(default_factory=dict)


registry: dict[str, PolicySpec] = {}


def register(id: str, entry_point: str, kwargs: dict[str, Any] | None = None):
    """Register a policy class under the design ``kind`` it operates."""
    if id in registry:
        raise ValueError(f"policy '{id}' is already registered")
    registry[id] = PolicySpec(id, entry_point, dict(kwargs or {}))


def load_entry_point(entry_point: str):
    module_name, _, attr = entry_point.partition(":")
    return getattr(importlib.import_module(module_name), attr)


def make_policy(design: SystemDesign, scenario: ScenarioParams) -> Policy:
    """Instantiate the policy registered for ``design.kind``."""
    try:
        spec = registry[design.kind]
    except KeyError:
        raise ConfigError("type", None, f"no policy registered for design type '{design.kind}'") from None
    policy_cls = load_entry_point(spec.entry_point)
    return policy_cls(design, scenario, **spec.kwargs)


##
# Register policies.
##

register(
    id="fixed",
    entry_point="transit_sandbox.policies.fixed.policy:FixedRoutePolicy",
    kwargs={"label": "Fixed route"},
)

register(
    id="flex",
    entry_point="transit_sandbox.policies.flex.policy:FlexRoutePolicy",
    kwargs={"label": "Flexible route (checkpoint deviation)"},
)

register(
    id="ondemand",
    entry_point="transit_sandbox.policies.ondemand.policy:OnDemandPolicy",
    kwargs={"label": "On-demand microtransit"},
)
