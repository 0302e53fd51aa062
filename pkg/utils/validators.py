from typing import Dict, Any, List, Tuple, Optional

from utils.spec_io import _safe_float

# Thresholds
MAX_DIM = 16          # dense storage, desk scale
DET_MIN = 1e-10       # |det g| below this counts as degenerate
GRAM_MIN = 1e-10      # Gram determinant of the embedding differential
TANGENCY_TOL = 1e-9   # normal component of A_ambient on tangent vectors
ETA_XI_TOL = 1e-9     # |eta(xi) - 1|

BACKENDS = {"chart", "embedded"}
MATRIX_FIELDS = ("G", "g", "F", "A", "Q")
VECTOR_FIELDS = ("xi", "eta")


def _event(kind: str, severity: str, details: Dict[str, Any], category: str = "schema") -> Dict[str, Any]:
    return {
        "type": kind,
        "severity": severity,
        "category": category,
        "details": details,
    }


def _is_matrix(m: Any, rows: int, cols: int) -> bool:
    if not isinstance(m, list) or len(m) != rows:
        return False
    return all(isinstance(r, list) and len(r) == cols for r in m)


def _is_vector(v: Any, n: int) -> bool:
    return isinstance(v, list) and len(v) == n


def validate_field(name: str, value: Any, dim: int) -> Tuple[bool, Optional[Dict[str, Any]]]:
    """
    Validate one field entry. Returns (is_valid, event_or_none)
    """
    if name in MATRIX_FIELDS:
        if not _is_matrix(value, dim, dim):
            return False, _event("field_shape", "high", {"field": name, "expected": f"{dim}x{dim} matrix"})
    elif name in VECTOR_FIELDS:
        if not _is_vector(value, dim):
            return False, _event("field_shape", "high", {"field": name, "expected": f"vector of length {dim}"})
    else:
        return False, _event("field_unknown", "high", {"field": name})

    cells = value if name in VECTOR_FIELDS else [c for row in value for c in row]
    for c in cells:
        if not isinstance(c, (str, int, float)) or isinstance(c, bool):
            return False, _event("field_entry_type", "high", {"field": name, "entry": repr(c)})
    return True, None


def validate_document(doc: Any) -> Tuple[bool, List[Dict[str, Any]]]:
    """
    Validate a spec document against the JSON schema.
    Returns (ok, events); ok is False when any high/critical event was raised.
    """
    events: List[Dict[str, Any]] = []
    if not isinstance(doc, dict):
        return False, [_event("not_an_object", "critical", {"found": type(doc).__name__})]

    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        return False, [_event("dim_invalid", "critical", {"dim": dim})]
    if dim > MAX_DIM:
        events.append(_event("dim_too_large", "high", {"dim": dim, "max": MAX_DIM}))

    backend = doc.get("backend", "chart")
    if backend not in BACKENDS:
        events.append(_event("backend_invalid", "critical", {"backend": backend}))

    domain = doc.get("domain")
    if domain is not None:
        if not isinstance(domain, list) or len(domain) != dim:
            events.append(_event("domain_shape", "high", {"expected": f"{dim} intervals"}))
        else:
            for i, iv in enumerate(domain):
                lo = _safe_float(iv[0]) if isinstance(iv, list) and len(iv) == 2 else None
                hi = _safe_float(iv[1]) if isinstance(iv, list) and len(iv) == 2 else None
                if lo is None or hi is None or not lo < hi:
                    events.append(_event("domain_interval", "high", {"coordinate": i, "interval": iv}))

    fields = doc.get("fields", {})
    if not isinstance(fields, dict):
        events.append(_event("fields_invalid", "critical", {"found": type(fields).__name__}))
        fields = {}
    for name, value in fields.items():
        ok, ev = validate_field(name, value, dim)
        if not ok:
            events.append(ev)

    if backend == "chart":
        has_metric = "G" in fields or ("g" in fields and ("F" in fields or "A" in fields))
        if not has_metric:
            events.append(_event("metric_missing", "critical",
                                 {"reason": "chart spec needs G, or g together with F or A"}))
    elif backend == "embedded":
        emb = doc.get("embedding")
        if not isinstance(emb, dict):
            events.append(_event("embedding_missing", "critical", {"reason": "embedded spec needs an embedding"}))
        else:
            m = emb.get("ambient_dim")
            if not isinstance(m, int) or isinstance(m, bool) or m < dim:
                events.append(_event("ambient_dim_invalid", "critical", {"ambient_dim": m, "dim": dim}))
            else:
                if not _is_vector(emb.get("map"), m):
                    events.append(_event("map_shape", "critical", {"expected": f"{m} expressions"}))
                if not _is_matrix(emb.get("A_ambient"), m, m):
                    events.append(_event("a_ambient_shape", "critical", {"expected": f"{m}x{m} matrix"}))
        for name in ("G", "g", "F", "A"):
            if name in fields:
                events.append(_event("field_ignored", "low", {"field": name,
                                                              "reason": "derived from the embedding"}))

    ok = not any(e["severity"] in ("high", "critical") for e in events)
    return ok, events


def check_point(diag: Dict[str, float], point: Any) -> List[Dict[str, Any]]:
    """
    Turn provider diagnostics at one sample point into events.
    """
    events: List[Dict[str, Any]] = []
    where = [round(float(x), 6) for x in point]
    gram = diag.get("gram_det")
    if gram is not None and gram < GRAM_MIN:
        events.append(_event("embedding_rank", "critical", {"gram_det": gram, "point": where}, "geometry"))
    det = diag.get("det_g")
    if det is not None and abs(det) < DET_MIN:
        events.append(_event("metric_degenerate", "critical", {"det_g": det, "point": where}, "geometry"))
    tang = diag.get("tangency")
    if tang is not None and tang > TANGENCY_TOL:
        events.append(_event("a_ambient_not_tangent", "critical", {"normal_part": tang, "point": where}, "geometry"))
    eta_xi = diag.get("eta_xi")
    if eta_xi is not None and abs(eta_xi - 1.0) > ETA_XI_TOL:
        events.append(_event("eta_xi_not_one", "high", {"eta_xi": eta_xi, "point": where}, "geometry"))
    return events
