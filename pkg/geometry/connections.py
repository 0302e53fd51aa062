"""
Connections, covariant derivatives, torsion, brackets and curvature.

Index conventions (chart frame e_i = d/dx^i, which commute):
    gam[k, i, j] = Gamma^k_ij  with  nabla_{e_i} e_j = Gamma^k_ij e_k
    T^k_ij = Gamma^k_ij - Gamma^k_ji,  T_cov[i, j, k] = g_ks T^s_ij
    nabla output puts the differentiation index first: out[m, ...] = (nabla_{e_m} t)[...]

Everything that needs derivatives of a connection works on jets, so the
coefficients come with exact first partials.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from manifolds.fields import FIELD_VALENCE, FieldProvider
from utils.errors import SingularMatrixError, SlotMismatch, UnsupportedValence
from utils.jets import Jet
from utils.tensor import TensorValue, invert_matrix, sup_norm

logger = logging.getLogger(__name__)

ADJOINT_TOL = 1e-10

Bundle = Dict[str, Jet]


def reindex(j: Jet, spec: str) -> Jet:
    """Permute value axes by a subscript rule such as 'jki->ijk'."""
    src, dst = spec.split("->")
    return j.permute([src.index(c) for c in dst])


# jet kernels

def christoffel_jet(g: Jet, ginv: Jet) -> Jet:
    dg = g.partial()                                   # dg[i, j, m] = d_m g_ij
    low = 0.5 * (reindex(dg, "jki->ijk") + reindex(dg, "ikj->ijk") - dg)
    return Jet.einsum("lk,ijk->lij", ginv, low)


def exterior_derivative_jet(F: Jet) -> Jet:
    P = F.partial()                                    # P[j, k, i] = d_i F_jk
    return reindex(P, "jki->ijk") + reindex(P, "kij->ijk") + P


def exterior_derivative_eta_jet(eta: Jet) -> Jet:
    P = eta.partial()                                  # P[b, a] = d_a eta_b
    return reindex(P, "ba->ab") - P


def levi_civita_builder(b: Bundle) -> Jet:
    return christoffel_jet(b["g"], b["ginv"])


# connection fields

@dataclass(frozen=True)
class ConnectionField:
    name: str
    provider: FieldProvider
    symmetric: bool
    builder: Callable[[Bundle], Jet]

    def coefficients(self, point: Sequence[float], order: int = 1, bundle: Optional[Bundle] = None) -> Jet:
        """Gamma^k_ij as a jet with `order` partials (the field bundle needs one more)."""
        if bundle is None:
            bundle = self.provider.bundle(point, order + 1)
        return self.builder(bundle).truncate(order)

    def at(self, point: Sequence[float], bundle: Optional[Bundle] = None) -> np.ndarray:
        return self.coefficients(point, 0 if bundle is None else 1, bundle).value


def levi_civita(provider: FieldProvider) -> ConnectionField:
    return ConnectionField("levi_civita", provider, True, levi_civita_builder)


def split_metric(provider: FieldProvider, point: Sequence[float]) -> Tuple[TensorValue, TensorValue]:
    G = provider.value("G", point).comps
    n = provider.dim
    g = TensorValue(n, (0, 2), 0.5 * (G + G.T))
    F = TensorValue(n, (0, 2), 0.5 * (G - G.T))
    return g, F


def adjoint_A(g: TensorValue, F: TensorValue, point: Optional[Sequence[float]] = None) -> TensorValue:
    """A^k_i = F_ij g^jk, so that g(AX, Y) = F(X, Y)."""
    try:
        ginv = invert_matrix(g).comps
    except SingularMatrixError as e:
        logger.warning("g is not invertible, condition number %.3e", e.cond)
        raise
    A = np.einsum("ij,jk->ki", F.comps, ginv)
    check = np.einsum("ki,kj->ij", A, g.comps) - F.comps
    if sup_norm(check) > ADJOINT_TOL * (1.0 + sup_norm(F)):
        cond = float(np.linalg.cond(g.comps))
        logger.warning("g(A., .) misses F by %.3e, condition number of g %.3e", sup_norm(check), cond)
        raise SingularMatrixError(cond)
    return TensorValue(g.dim, (1, 1), A)


# differential operators at a point

def _field_jet(field, point, provider: Optional[FieldProvider], bundle: Optional[Bundle]) -> Jet:
    if isinstance(field, Jet):
        return field
    if bundle is not None:
        return bundle[field]
    if provider is None:
        raise SlotMismatch(f"field '{field}' given by name but no provider to evaluate it")
    return provider.jet(field, point, 1)


def nabla_components(gam: np.ndarray, t: Jet, valence: Tuple[int, int]) -> np.ndarray:
    d = t.parts[1]
    d = np.moveaxis(d, -1, 0)
    v = t.value
    if valence == (1, 0):
        return d + np.einsum("imp,p->mi", gam, v)
    if valence == (0, 1):
        return d - np.einsum("pmi,p->mi", gam, v)
    if valence == (1, 1):
        return d + np.einsum("imp,pj->mij", gam, v) - np.einsum("pmj,ip->mij", gam, v)
    if valence == (0, 2):
        return d - np.einsum("pmi,pj->mij", gam, v) - np.einsum("pmj,ip->mij", gam, v)
    if valence == (0, 3):
        return (d - np.einsum("pmi,pjk->mijk", gam, v) - np.einsum("pmj,ipk->mijk", gam, v)
                - np.einsum("pmk,ijp->mijk", gam, v))
    raise UnsupportedValence(f"covariant derivative of valence {valence} is not supported")


def covariant_derivative(conn: ConnectionField, field: Union[str, Jet], point: Sequence[float],
                         valence: Optional[Tuple[int, int]] = None,
                         gam: Optional[np.ndarray] = None, bundle: Optional[Bundle] = None) -> TensorValue:
    """
    nabla_{e_m} of a tensor field, differentiating along the first lower slot of Gamma:
        (0,2): d_m h_ij - Gamma^p_mi h_pj - Gamma^p_mj h_ip
    """
    if valence is None:
        if not isinstance(field, str):
            raise UnsupportedValence("valence is required for a field given as a jet")
        valence = FIELD_VALENCE[field]
    valence = tuple(valence)
    t = _field_jet(field, point, conn.provider, bundle)
    if gam is None:
        gam = conn.at(point, bundle)
    out = nabla_components(np.asarray(gam), t, valence)
    p, q = valence
    return TensorValue(conn.provider.dim, (p, q + 1), out)


def covariant_derivative_pm(conn: ConnectionField, field: Union[str, Jet], point: Sequence[float],
                            gam: Optional[np.ndarray] = None,
                            bundle: Optional[Bundle] = None) -> Tuple[TensorValue, TensorValue]:
    """The two NGT derivatives of a (1,1) field a^i_j:
        plus:  d_m a^i_j + Gamma^i_pm a^p_j - Gamma^p_jm a^i_p
        minus: d_m a^i_j + Gamma^i_mp a^p_j - Gamma^p_mj a^i_p
    """
    if isinstance(field, str) and FIELD_VALENCE.get(field) != (1, 1):
        raise UnsupportedValence(f"plus/minus derivatives need a (1,1) field, '{field}' is not one")
    t = _field_jet(field, point, conn.provider, bundle)
    if t.value.ndim != 2:
        raise UnsupportedValence("plus/minus derivatives need a (1,1) field")
    if gam is None:
        gam = conn.at(point, bundle)
    d = np.moveaxis(t.parts[1], -1, 0)
    a = t.value
    plus = d + np.einsum("ipm,pj->mij", gam, a) - np.einsum("pjm,ip->mij", gam, a)
    minus = d + np.einsum("imp,pj->mij", gam, a) - np.einsum("pmj,ip->mij", gam, a)
    n = conn.provider.dim
    return TensorValue(n, (1, 2), plus), TensorValue(n, (1, 2), minus)


def torsion_from_coefficients(gam: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    T = gam - np.transpose(gam, (0, 2, 1))
    return T, np.einsum("ks,sij->ijk", g, T)


def torsion_of(conn: ConnectionField, point: Sequence[float],
               g: Optional[TensorValue] = None) -> Tuple[TensorValue, TensorValue]:
    gam = conn.at(point)
    gm = g.comps if g is not None else conn.provider.value("g", point).comps
    T, T_cov = torsion_from_coefficients(gam, gm)
    n = conn.provider.dim
    return TensorValue(n, (1, 2), T), TensorValue(n, (0, 3), T_cov)


def bracket_jet(X: Jet, Y: Jet) -> Jet:
    """[X, Y]^k = X^s d_s Y^k - Y^s d_s X^k, one order lower than the inputs."""
    return Jet.einsum("s,ks->k", X, Y.partial()) - Jet.einsum("s,ks->k", Y, X.partial())


def lie_bracket(X, Y, point: Optional[Sequence[float]] = None) -> TensorValue:
    """X and Y are vector jets of order >= 1, or callables (point, order) -> jet."""
    if callable(X) and not isinstance(X, Jet):
        X = X(point, 1)
    if callable(Y) and not isinstance(Y, Jet):
        Y = Y(point, 1)
    br = bracket_jet(X, Y).value
    return TensorValue(br.shape[0], (1, 0), br)


def lie_derivative_A(A: Jet, xi: Jet) -> np.ndarray:
    """(L_xi A)^k_c = xi^m d_m A^k_c - A^m_c d_m xi^k + A^k_m d_c xi^m."""
    dA = A.parts[1]                                    # dA[k, c, m] = d_m A^k_c
    dxi = xi.parts[1]                                  # dxi[k, m] = d_m xi^k
    return (np.einsum("m,kcm->kc", xi.value, dA)
            - np.einsum("mc,km->kc", A.value, dxi)
            + np.einsum("km,mc->kc", A.value, dxi))


def curvature_from_jet(gam: Jet) -> np.ndarray:
    """R^i_klm = d_m Gamma^i_kl - d_l Gamma^i_km - Gamma^i_sl Gamma^s_km + Gamma^i_sm Gamma^s_kl."""
    G = gam.value
    dG = gam.parts[1]                                  # dG[i, k, l, m] = d_m Gamma^i_kl
    return (dG - np.transpose(dG, (0, 1, 3, 2))
            - np.einsum("isl,skm->iklm", G, G)
            + np.einsum("ism,skl->iklm", G, G))


def curvature(conn: ConnectionField, point: Sequence[float]) -> TensorValue:
    R = curvature_from_jet(conn.coefficients(point, 1))
    return TensorValue(conn.provider.dim, (1, 3), R)


def sectional_curvature(R: np.ndarray, g: np.ndarray, a: int, b: int) -> float:
    num = -np.einsum("i,i->", g[a], R[:, b, a, b])
    den = g[a, a] * g[b, b] - g[a, b] ** 2
    return float(num / den)


def bianchi_residual(R: np.ndarray) -> float:
    cyc = R + np.transpose(R, (0, 2, 3, 1)) + np.transpose(R, (0, 3, 1, 2))
    return sup_norm(cyc)


def exterior_derivative_F(provider: FieldProvider, point: Sequence[float]) -> TensorValue:
    dF = exterior_derivative_jet(provider.jet("F", point, 1)).value
    return TensorValue(provider.dim, (0, 3), dF)


def exterior_derivative_eta(provider: FieldProvider, point: Sequence[float]) -> TensorValue:
    deta = exterior_derivative_eta_jet(provider.jet("eta", point, 1)).value
    return TensorValue(provider.dim, (0, 2), deta)
