from __future__ import annotations

import logging
from typing import Any, Dict

from manifolds.builtins import builtin
from manifolds.fields import load_spec, make_provider
from utils.errors import GeometryError
from utils.sampling import sample_points
from workflow.state_schema import SuiteState

logger = logging.getLogger(__name__)


def _load(state: SuiteState):
    document: Dict[str, Any] = state.get("document")
    if document is not None:
        return load_spec(document)
    name = state.get("builtin")
    if not name:
        raise GeometryError("no spec document and no builtin name given")
    return builtin(name, state.get("params") or {})


def spec_monitor_node(state: SuiteState) -> SuiteState:
    """
    Agent 1: SpecMonitor
    Input:
      - spec document or builtin name (+ params)
      - points, seed
    Output:
      - validated spec, field provider, sample points
    """
    try:
        spec = _load(state)
        provider = make_provider(spec)
        pts = sample_points(spec.domain, int(state["points"]), int(state["seed"]))

        state["spec"] = spec
        state["provider"] = provider
        state["sample_points"] = pts
        state["execution_log"].append(
            f"SpecMonitor: spec={spec.name} backend={spec.backend} dim={spec.dim} "
            f"points={len(pts)} seed={state['seed']}")
    except GeometryError as e:
        logger.debug("spec rejected: %s", e)
        state["spec"] = None
        state["fatal"] = e
        state["errors"].append(f"SpecMonitor: {e}")
        state["execution_log"].append("SpecMonitor: spec rejected")
    return state
