from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from agents.catalog import Identity, get_identity, suite_ids
from geometry.pointwise import PointGeometry
from geometry.spectral import SpectralSplit, spectral_split
from manifolds.fields import FieldProvider, ManifoldSpec
from utils.errors import GeometryError, NonConstantSpectrum
from utils.tensor import residual
from workflow.state_schema import SuiteState

logger = logging.getLogger(__name__)

# numerical failures inside one identity are reported, never raised out of the node
EVAL_ERRORS = (GeometryError, ArithmeticError, np.linalg.LinAlgError, ValueError)


def metric_signature(provider: FieldProvider, point: Sequence[float]) -> str:
    g = provider.value("g", point).comps
    w = np.linalg.eigvalsh(0.5 * (g + g.T))
    return "riemannian" if np.all(w > 0) else "indefinite"


def has_unit_q(provider: FieldProvider, pts: Sequence[Sequence[float]], tol: float) -> bool:
    """True when Q = Id at every sample point."""
    n = provider.dim
    return all(residual(provider.value("Q", p).comps, -np.eye(n)) <= tol for p in pts)


def skip_reason(identity: Identity, spec: ManifoldSpec, signature: str,
                unit_q: bool = True) -> Optional[str]:
    for name in identity.requires:
        if not spec.has(name):
            return f"requires field '{name}'"
    for name in identity.excludes:
        if spec.has(name):
            return f"not defined for specs with field '{name}'"
    if identity.signature and identity.signature != signature:
        return f"needs a {identity.signature} metric, spec metric is {signature}"
    if identity.unit_q and not unit_q:
        return "coordinate-frame evaluation needs Q = Id"
    return None


def identity_residual(identity_id: str, provider: FieldProvider, point: Sequence[float],
                      split: Optional[SpectralSplit] = None, geo: Optional[PointGeometry] = None) -> float:
    """Residual of one catalog identity at one point."""
    identity = get_identity(identity_id)
    if geo is None:
        geo = PointGeometry(provider, point)
    if identity.uses_split and split is None:
        split = spectral_split(provider, [point])
    return float(identity.fn(geo, split))


def identity_checker_node(state: SuiteState) -> SuiteState:
    """
    Agent 2: IdentityChecker
    Input:
      - spec, provider, sample points
      - suite
    Output:
      - residual table (one row per identity and point)
      - skipped identities with reasons
    """
    spec = state.get("spec")
    if spec is None:
        state["execution_log"].append("IdentityChecker: skipped (no spec)")
        return state

    provider: FieldProvider = state["provider"]
    pts: List[np.ndarray] = state["sample_points"]
    try:
        ids = suite_ids(state["suite"])
    except GeometryError as e:
        state["fatal"] = e
        state["errors"].append(f"IdentityChecker: {e}")
        return state

    try:
        signature = metric_signature(provider, pts[0])
        unit_q = True
        if any(get_identity(i).unit_q for i in ids):
            unit_q = has_unit_q(provider, pts, float(state["tol"]))
    except EVAL_ERRORS as e:
        state["fatal"] = e
        state["errors"].append(f"IdentityChecker: {e}")
        return state

    applicable: List[Identity] = []
    skipped: Dict[str, str] = {}
    for identity_id in ids:
        identity = get_identity(identity_id)
        reason = skip_reason(identity, spec, signature, unit_q)
        if reason:
            skipped[identity_id] = reason
        else:
            applicable.append(identity)
    if skipped:
        logger.info("skipped identities: %s", ", ".join(f"{k} ({v})" for k, v in skipped.items()))

    split: Optional[SpectralSplit] = None
    split_failure: Optional[Exception] = None
    if any(i.uses_split for i in applicable):
        try:
            split = spectral_split(provider, pts)
        except EVAL_ERRORS as e:
            split_failure = e
            state["errors"].append(f"IdentityChecker: spectral split: {e}")

    rows: List[Dict[str, Any]] = []
    reasons: Dict[str, str] = {}
    for k, p in enumerate(pts):
        geo = PointGeometry(provider, p)
        for identity in applicable:
            if identity.uses_split and split_failure is not None:
                if isinstance(split_failure, NonConstantSpectrum):
                    value = float(split_failure.spread)
                else:
                    value = float("inf")
                reasons.setdefault(identity.id, str(split_failure))
                rows.append({"id": identity.id, "point": k, "residual": value})
                continue
            try:
                value = float(identity.fn(geo, split))
            except EVAL_ERRORS as e:
                value = float("inf")
                if identity.id not in reasons:
                    reasons[identity.id] = f"{type(e).__name__}: {e}"
                    state["errors"].append(f"IdentityChecker: {identity.id}: {e}")
            rows.append({"id": identity.id, "point": k, "residual": value})

    state["applicable"] = [i.id for i in applicable]
    state["skipped"] = skipped
    state["residuals"] = rows
    state["reasons"] = reasons
    state["execution_log"].append(
        f"IdentityChecker: ids={len(ids)} evaluated={len(applicable)} skipped={len(skipped)}")
    return state
