from __future__ import annotations

from typing import Any, Dict, List, Optional


class GeometryError(Exception):
    """Base class for every error raised by the engine."""


# expressions

class ExprError(GeometryError):
    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifier(ExprError):
    pass


class VariableRange(ExprError):
    pass


class EvalDomainError(GeometryError):
    def __init__(self, message: str, subexpression: str):
        self.subexpression = subexpression
        super().__init__(f"{message} in '{subexpression}'")


# tensors

class SlotMismatch(GeometryError):
    pass


class SingularMatrixError(GeometryError):
    def __init__(self, cond: float):
        self.cond = cond
        super().__init__(f"matrix is singular or ill-conditioned (condition estimate {cond:.3e})")


# manifold specs

class SpecSchemaError(GeometryError):
    def __init__(self, message: str, events: Optional[List[Dict[str, Any]]] = None):
        self.events = list(events or [])
        super().__init__(message)


class DegenerateMetricError(GeometryError):
    pass


class RankDeficientEmbedding(GeometryError):
    pass


class TangencyError(GeometryError):
    pass


class MissingFieldError(GeometryError):
    def __init__(self, field: str, context: str = ""):
        self.field = field
        msg = f"missing required field '{field}'"
        if context:
            msg = f"{msg} for {context}"
        super().__init__(msg)


class UnknownBuiltin(GeometryError):
    pass


class PointOutsideDomain(GeometryError):
    pass


# connections and structures

class TorsionSymmetryError(GeometryError):
    pass


class UnsupportedValence(GeometryError):
    pass


class CommutationError(GeometryError):
    pass


class MultiplicityError(GeometryError):
    def __init__(self, message: str, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"{message} (eigenvalue {eigenvalue:.10g})")


class NonConstantSpectrum(GeometryError):
    def __init__(self, spread: float):
        self.spread = spread
        super().__init__(f"eigenvalues of Q are not constant across samples (spread {spread:.3e})")


# verification

class UnknownIdentity(GeometryError):
    pass
