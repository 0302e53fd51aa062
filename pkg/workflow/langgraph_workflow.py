from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Dict, Optional

from langgraph.graph import StateGraph, END

from workflow.state_schema import SuiteState
from agents.spec_monitor import spec_monitor_node
from agents.identity_checker import identity_checker_node
from agents.decision import DEFAULT_TOL, decision_node
from utils.sampling import DEFAULT_POINTS, DEFAULT_SEED


def build_graph():
    workflow = StateGraph(SuiteState)

    workflow.add_node("spec_monitor", spec_monitor_node)
    workflow.add_node("identity_checker", identity_checker_node)
    workflow.add_node("decision", decision_node)

    workflow.set_entry_point("spec_monitor")
    workflow.add_edge("spec_monitor", "identity_checker")
    workflow.add_edge("identity_checker", "decision")
    workflow.add_edge("decision", END)

    return workflow.compile()


def make_initial_state(
    document: Optional[Dict[str, Any]] = None,
    builtin: Optional[str] = None,
    params: Optional[Dict[str, Any]] = None,
    suite: str = "all",
    points: int = DEFAULT_POINTS,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> SuiteState:
    return {
        "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        "document": document,
        "builtin": builtin,
        "params": dict(params or {}),
        "suite": suite,
        "points": int(points),
        "seed": int(seed),
        "tol": float(tol),
        "spec": None,
        "provider": None,
        "sample_points": [],
        "applicable": [],
        "skipped": {},
        "residuals": [],
        "reasons": {},
        "report": None,
        "fatal": None,
        "execution_log": [],
        "errors": [],
    }


def run_suite_state(**kwargs) -> SuiteState:
    graph = build_graph()
    return graph.invoke(make_initial_state(**kwargs))


def run_suite(
    document: Optional[Dict[str, Any]] = None,
    builtin: Optional[str] = None,
    params: Optional[Dict[str, Any]] = None,
    suite: str = "all",
    points: int = DEFAULT_POINTS,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> Dict[str, Any]:
    """Run one suite and return the report; load errors are re-raised."""
    result = run_suite_state(document=document, builtin=builtin, params=params,
                             suite=suite, points=points, seed=seed, tol=tol)
    if result.get("fatal") is not None:
        raise result["fatal"]
    return result["report"]
