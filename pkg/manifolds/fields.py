"""
Manifold specifications and field providers.

A provider turns a ManifoldSpec into jets of the named fields at a chart
point. Both backends end in the same completion step, which derives the
missing members of (G, g, F, A, Q, xi, eta) from the given ones:

    g = sym(G), F = skew(G)        A^k_i = F_ij g^jk
    F_ij = g_kj A^k_i (if only A)  Q = -A^2 (+ xi (x) eta with contact fields)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import (
    DegenerateMetricError,
    MissingFieldError,
    PointOutsideDomain,
    RankDeficientEmbedding,
    SpecSchemaError,
    TangencyError,
)
from utils.expr import Expr, eval_bound, parse_expr
from utils.jets import Jet
from utils.sampling import DEFAULT_SEED, sample_points
from utils.spec_io import spec_hash
from utils.tensor import TensorValue
from utils.validators import check_point, validate_document

logger = logging.getLogger(__name__)

DEFAULT_BOX = (-0.8, 0.8)
SPOT_CHECK_POINTS = 8
FIELD_ORDER = 2

FIELD_VALENCE: Dict[str, Tuple[int, int]] = {
    "G": (0, 2),
    "g": (0, 2),
    "F": (0, 2),
    "A": (1, 1),
    "Q": (1, 1),
    "xi": (1, 0),
    "eta": (0, 1),
}


@dataclass(frozen=True)
class Embedding:
    ambient_dim: int
    map: Tuple[Expr, ...]
    a_ambient: Tuple[Tuple[Expr, ...], ...]


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    dim: int
    backend: str
    domain: Tuple[Tuple[float, float], ...]
    fields: Dict[str, Any]
    embedding: Optional[Embedding]
    document: Dict[str, Any] = field(repr=False)

    @property
    def hash(self) -> str:
        return spec_hash(self.document)

    def given(self, name: str) -> bool:
        return name in self.fields

    def has(self, name: str) -> bool:
        """Whether the provider can produce the field (given or derivable)."""
        if name in ("G", "g", "F", "A", "Q"):
            return True
        if name in ("xi", "eta"):
            return "xi" in self.fields or "eta" in self.fields
        return False

    @property
    def contact(self) -> bool:
        return self.has("xi")

    def contains(self, point: Sequence[float], slack: float = 1e-12) -> bool:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            return False
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(p, self.domain))


def _parse_matrix(rows: List[List[Any]], dim: int) -> Tuple[Tuple[Expr, ...], ...]:
    return tuple(tuple(parse_expr(str(c), dim) for c in row) for row in rows)


def _parse_vector(cells: List[Any], dim: int) -> Tuple[Expr, ...]:
    return tuple(parse_expr(str(c), dim) for c in cells)


def load_spec(document: Dict[str, Any], spot_checks: int = SPOT_CHECK_POINTS) -> ManifoldSpec:
    ok, events = validate_document(document)
    if not ok:
        bad = [e for e in events if e["severity"] in ("high", "critical")]
        summary = "; ".join(f"{e['type']} {e['details']}" for e in bad)
        raise SpecSchemaError(f"spec document rejected: {summary}", events)

    dim = int(document["dim"])
    backend = document.get("backend", "chart")
    domain = document.get("domain") or [list(DEFAULT_BOX)] * dim
    domain_t = tuple((float(lo), float(hi)) for lo, hi in domain)

    raw_fields = document.get("fields", {})
    fields: Dict[str, Any] = {}
    for name, value in raw_fields.items():
        if backend == "embedded" and name in ("G", "g", "F", "A"):
            continue
        if FIELD_VALENCE[name] in ((0, 2), (1, 1)):
            fields[name] = _parse_matrix(value, dim)
        else:
            fields[name] = _parse_vector(value, dim)

    embedding = None
    if backend == "embedded":
        emb = document["embedding"]
        m = int(emb["ambient_dim"])
        embedding = Embedding(
            ambient_dim=m,
            map=_parse_vector(emb["map"], dim),
            a_ambient=_parse_matrix(emb["A_ambient"], m),
        )

    spec = ManifoldSpec(
        name=str(document.get("name", "spec")),
        dim=dim,
        backend=backend,
        domain=domain_t,
        fields=fields,
        embedding=embedding,
        document=document,
    )
    if spot_checks > 0:
        _spot_check(spec, spot_checks)
    return spec


def _spot_check(spec: ManifoldSpec, count: int) -> None:
    provider = make_provider(spec)
    for p in sample_points(spec.domain, count, DEFAULT_SEED):
        diag = provider.diagnostics(p)
        for ev in check_point(diag, p):
            if ev["type"] == "metric_degenerate":
                raise DegenerateMetricError(f"g is degenerate at {ev['details']['point']} (det {ev['details']['det_g']:.3e})")
            if ev["type"] == "embedding_rank":
                raise RankDeficientEmbedding(
                    f"embedding differential is rank deficient at {ev['details']['point']} "
                    f"(Gram determinant {ev['details']['gram_det']:.3e})")
            if ev["type"] == "a_ambient_not_tangent":
                raise TangencyError(
                    f"A_ambient maps tangent vectors off the tangent space at {ev['details']['point']} "
                    f"(normal part {ev['details']['normal_part']:.3e})")
            raise SpecSchemaError(f"{ev['type']}: {ev['details']}", [ev])
    logger.debug("spot checks passed for %s at %d points", spec.name, count)


# providers

def _eval_matrix(exprs, env: Sequence[Jet]) -> Jet:
    rows = len(exprs)
    cols = len(exprs[0])
    return Jet.stack([eval_bound(e, env) for row in exprs for e in row], (rows, cols))


def _eval_vector(exprs, env: Sequence[Jet]) -> Jet:
    return Jet.stack([eval_bound(e, env) for e in exprs], (len(exprs),))


def complete_fields(raw: Dict[str, Jet]) -> Dict[str, Jet]:
    out = dict(raw)
    if "g" not in out:
        G = out["G"]
        Gt = G.permute((1, 0))
        out["g"] = 0.5 * (G + Gt)
        out.setdefault("F", 0.5 * (G - Gt))
    g = out["g"]
    ginv = g.inv()
    if "F" not in out:
        out["F"] = Jet.einsum("ki,kj->ij", out["A"], g)
    if "G" not in out:
        out["G"] = g + out["F"]
    if "A" not in out:
        out["A"] = Jet.einsum("kj,ij->ki", ginv, out["F"])
    if "xi" in out and "eta" not in out:
        out["eta"] = Jet.einsum("ij,j->i", g, out["xi"])
    if "eta" in out and "xi" not in out:
        out["xi"] = Jet.einsum("ij,j->i", ginv, out["eta"])
    if "Q" not in out:
        A = out["A"]
        Q = -Jet.einsum("kp,pi->ki", A, A)
        if "xi" in out:
            Q = Q + Jet.einsum("k,i->ki", out["xi"], out["eta"])
        out["Q"] = Q
    out["ginv"] = ginv
    return out


class FieldProvider:
    """Yields jets of the named fields of a spec at chart points."""

    def __init__(self, spec: ManifoldSpec):
        self.spec = spec
        self.dim = spec.dim

    def _raw(self, point: np.ndarray, order: int) -> Dict[str, Jet]:
        raise NotImplementedError

    def bundle(self, point: Sequence[float], order: int = FIELD_ORDER) -> Dict[str, Jet]:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.dim,):
            raise PointOutsideDomain(f"point has {p.shape[0] if p.ndim else 0} coordinates, chart dimension is {self.dim}")
        return complete_fields(self._raw(p, order))

    def jet(self, name: str, point: Sequence[float], order: int = 1) -> Jet:
        if not self.spec.has(name):
            raise MissingFieldError(name, f"spec '{self.spec.name}'")
        return self.bundle(point, order)[name]

    def value(self, name: str, point: Sequence[float]) -> TensorValue:
        j = self.jet(name, point, 0)
        return TensorValue(self.dim, FIELD_VALENCE[name], j.value)

    def diagnostics(self, point: Sequence[float]) -> Dict[str, float]:
        b = self._raw(np.asarray(point, dtype=float), 0)
        out: Dict[str, float] = {}
        g = b["g"].value if "g" in b else 0.5 * (b["G"].value + b["G"].value.T)
        out["det_g"] = float(np.linalg.det(g))
        if abs(out["det_g"]) > 0 and ("xi" in self.spec.fields or "eta" in self.spec.fields):
            full = complete_fields(b)
            out["eta_xi"] = float(full["eta"].value @ full["xi"].value)
        return out


class ChartProvider(FieldProvider):
    def _raw(self, point: np.ndarray, order: int) -> Dict[str, Jet]:
        env = Jet.coordinates(point, order)
        raw: Dict[str, Jet] = {}
        for name, exprs in self.spec.fields.items():
            if FIELD_VALENCE[name] in ((0, 2), (1, 1)):
                raw[name] = _eval_matrix(exprs, env)
            else:
                raw[name] = _eval_vector(exprs, env)
        return raw


class EmbeddedProvider(FieldProvider):
    """
    Induced structure of an embedding phi with an ambient endomorphism field M:
        g = Dphi^T Dphi,  F_ij = <M Dphi e_i, Dphi e_j>,  A = g^-1 Dphi^T M Dphi
    """

    def _embedding_jets(self, point: np.ndarray, order: int):
        emb = self.spec.embedding
        env = Jet.coordinates(point, order + 1)
        phi = _eval_vector(emb.map, env)
        dphi = phi.partial()                      # (m, n), order `order`
        phi_env = [phi[a].truncate(order) for a in range(emb.ambient_dim)]
        M = _eval_matrix(emb.a_ambient, phi_env)  # (m, m)
        return env, dphi, M

    def _raw(self, point: np.ndarray, order: int) -> Dict[str, Jet]:
        env, dphi, M = self._embedding_jets(point, order)
        g = Jet.einsum("ai,aj->ij", dphi, dphi)
        W = Jet.einsum("ab,bi->ai", M, dphi)
        F = Jet.einsum("ai,aj->ij", W, dphi)
        S = Jet.einsum("ak,ai->ki", dphi, W)
        A = Jet.einsum("kl,li->ki", g.inv(), S)
        raw: Dict[str, Jet] = {"g": g, "F": F, "A": A}
        chart_env = [e.truncate(order) for e in env]
        for name, exprs in self.spec.fields.items():
            if FIELD_VALENCE[name] in ((0, 2), (1, 1)):
                raw[name] = _eval_matrix(exprs, chart_env)
            else:
                raw[name] = _eval_vector(exprs, chart_env)
        return raw

    def diagnostics(self, point: Sequence[float]) -> Dict[str, float]:
        p = np.asarray(point, dtype=float)
        _, dphi, M = self._embedding_jets(p, 0)
        D = dphi.value
        gram = D.T @ D
        out: Dict[str, float] = {"gram_det": float(np.linalg.det(gram)), "det_g": float(np.linalg.det(gram))}
        if out["gram_det"] <= 0.0:
            return out
        W = M.value @ D
        A = np.linalg.solve(gram, D.T @ W)
        out["tangency"] = float(np.max(np.abs(W - D @ A))) if W.size else 0.0
        if "xi" in self.spec.fields or "eta" in self.spec.fields:
            full = complete_fields(self._raw(p, 0))
            out["eta_xi"] = float(full["eta"].value @ full["xi"].value)
        return out


def make_provider(spec: ManifoldSpec) -> FieldProvider:
    if spec.backend == "embedded":
        return EmbeddedProvider(spec)
    return ChartProvider(spec)
