from typing import TypedDict, Dict, List, Any, Optional


class SuiteState(TypedDict):
    timestamp: str

    # input: one of document / builtin (+ params)
    document: Optional[Dict[str, Any]]
    builtin: Optional[str]
    params: Dict[str, Any]

    suite: str
    points: int
    seed: int
    tol: float

    spec: Any
    provider: Any
    sample_points: List[Any]

    applicable: List[str]
    skipped: Dict[str, str]
    residuals: List[Dict[str, Any]]
    reasons: Dict[str, str]

    report: Optional[Dict[str, Any]]
    fatal: Optional[Exception]
    execution_log: List[str]
    errors: List[str]
