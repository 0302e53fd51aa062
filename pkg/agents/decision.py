from __future__ import annotations

import math
from typing import Dict, Any, List, Optional

import pandas as pd

from agents.catalog import get_identity, suite_ids
from workflow.state_schema import SuiteState


ENGINE_VERSION = "gr-verify 0.1.0"

# thresholds
DEFAULT_TOL = 1e-8


def _finite_or_none(x: float) -> Optional[float]:
    return float(x) if math.isfinite(x) else None


def _aggregate(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    if not rows:
        return pd.DataFrame(columns=["max", "mean", "count"])
    df = pd.DataFrame(rows)
    # a NaN residual is a failed evaluation, not a missing one
    df["residual"] = df["residual"].astype(float).fillna(float("inf"))
    return df.groupby("id")["residual"].agg(["max", "mean", "count"])


def _verdict(max_residual: float, tol: float) -> str:
    return "pass" if math.isfinite(max_residual) and max_residual <= tol else "fail"


def build_results(state: SuiteState) -> List[Dict[str, Any]]:
    tol = float(state["tol"])
    agg = _aggregate(state.get("residuals") or [])
    skipped: Dict[str, str] = state.get("skipped") or {}
    reasons: Dict[str, str] = state.get("reasons") or {}

    results: List[Dict[str, Any]] = []
    for identity_id in suite_ids(state["suite"]):
        identity = get_identity(identity_id)
        row: Dict[str, Any] = {"id": identity_id, "formula": identity.formula,
                               "paper_ref": identity.paper_ref}
        if identity_id in skipped:
            row.update({"max_residual": None, "mean_residual": None, "points": 0,
                        "tolerance": tol, "verdict": "skip", "reason": skipped[identity_id]})
        elif identity_id in agg.index:
            mx = float(agg.loc[identity_id, "max"])
            row.update({
                "max_residual": _finite_or_none(mx),
                "mean_residual": _finite_or_none(float(agg.loc[identity_id, "mean"])),
                "points": int(agg.loc[identity_id, "count"]),
                "tolerance": tol,
                "verdict": _verdict(mx, tol),
                "reason": reasons.get(identity_id),
            })
        else:
            continue
        results.append(row)
    return results


def decision_node(state: SuiteState) -> SuiteState:
    """
    Agent 3: Decision
    Input:
      - residual table (IdentityChecker)
      - skipped identities
      - tolerance
    Output:
      - report with one verdict per identity in catalog order
    """
    spec = state.get("spec")
    if spec is None or state.get("fatal") is not None:
        state["report"] = None
        state["execution_log"].append("Decision: skipped (no residuals)")
        return state

    results = build_results(state)
    counts = {v: sum(1 for r in results if r["verdict"] == v) for v in ("pass", "fail", "skip")}

    state["report"] = {
        "spec": {"name": spec.name, "hash": spec.hash},
        "seed": int(state["seed"]),
        "points": int(state["points"]),
        "tol": float(state["tol"]),
        "suite": state["suite"],
        "engine": ENGINE_VERSION,
        "generated_at": state["timestamp"],
        "results": results,
        "errors": list(state["errors"]),
    }
    state["execution_log"].append(
        f"Decision: pass={counts['pass']} fail={counts['fail']} skip={counts['skip']}")
    return state


def worst_verdict(report: Dict[str, Any]) -> str:
    verdicts = {r["verdict"] for r in report.get("results", [])}
    if "fail" in verdicts:
        return "fail"
    return "pass"
