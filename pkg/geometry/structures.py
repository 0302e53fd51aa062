"""
Weak structures: axiom residuals for the four structure kinds, the weak
nearly Kähler and almost-nearly-cosymplectic conditions, the contact
tensors N5 and N_wac, and the Reeb field properties.

All tensors are evaluated on the coordinate frame; (0,3) arrays are indexed
[x, y, z] for the arguments (X, Y, Z).
"""
from __future__ import annotations

import logging
from typing import Dict, Optional, Sequence

import numpy as np

from geometry.connections import lie_derivative_A
from geometry.pointwise import PointGeometry
from geometry.spectral import generalized_eigh
from manifolds.fields import FieldProvider
from utils.errors import MissingFieldError, SpecSchemaError
from utils.jets import Jet
from utils.tensor import residual, slot_apply

logger = logging.getLogger(__name__)

# kind -> (sign of Q in A^2, contact)
STRUCTURE_KINDS = {
    "weak_hermitian": (-1.0, False),
    "weak_acm": (-1.0, True),
    "weak_para_hermitian": (1.0, False),
    "weak_para_contact": (1.0, True),
}


def _geometry(provider: FieldProvider, point: Sequence[float], geo: Optional[PointGeometry]) -> PointGeometry:
    return geo if geo is not None else PointGeometry(provider, point)


def _q_min_eigenvalue(g: np.ndarray, Q: np.ndarray) -> float:
    if np.all(np.linalg.eigvalsh(0.5 * (g + g.T)) > 0):
        w, _ = generalized_eigh(g, Q)
        return float(w[0])
    # indefinite metric: the spectrum of a g-self-adjoint Q need not be real
    return float(np.min(np.linalg.eigvals(Q).real))


def check_axioms(provider: FieldProvider, kind: str, point: Sequence[float],
                 geo: Optional[PointGeometry] = None) -> Dict[str, float]:
    """Residual of every axiom of `kind` plus the smallest eigenvalue of Q."""
    if kind not in STRUCTURE_KINDS:
        raise SpecSchemaError(f"unknown structure kind '{kind}', expected one of {sorted(STRUCTURE_KINDS)}")
    sign, contact = STRUCTURE_KINDS[kind]
    if contact and not provider.spec.has("xi"):
        raise MissingFieldError("xi", f"structure kind '{kind}'")
    geo = _geometry(provider, point, geo)
    g, F, A, Q = geo.g, geo.F, geo.A, geo.Q

    A2 = [A @ A, -sign * Q]
    gAA = [A.T @ g @ A, sign * (Q.T @ g)]
    out: Dict[str, float] = {}
    if contact:
        xi, eta = geo.xi, geo.eta
        A2.append(sign * np.outer(xi, eta))
        gAA.append(-sign * np.outer(eta, eta))
        out["A_xi"] = residual(A @ xi)
        out["Q_xi"] = residual(Q @ xi, -xi)
        out["eta_xi"] = abs(float(eta @ xi) - 1.0)
    out["A_squared"] = residual(*A2)
    out["g_AA"] = residual(*gAA)
    out["F_gA"] = residual(F, -(A.T @ g))
    out["Q_selfadjoint"] = residual(Q.T @ g, -(g @ Q))
    out["AQ_commute"] = residual(A @ Q, -(Q @ A))
    q_min = _q_min_eigenvalue(g, Q)
    out["Q_positive"] = max(0.0, -q_min)
    out["q_min_eigenvalue"] = q_min
    logger.debug("%s axioms at %s: %s", kind, tuple(np.round(geo.point, 4)), out)
    return out


def axiom_residual(axioms: Dict[str, float]) -> float:
    return max(v for k, v in axioms.items() if k != "q_min_eigenvalue")


def nearly_kahler_residual(provider: FieldProvider, point: Sequence[float],
                           geo: Optional[PointGeometry] = None) -> float:
    """Symmetric part of (X, Y) -> g((nabla^g_X A) Y, Z)."""
    L = _geometry(provider, point, geo).L_g
    return residual(L, np.transpose(L, (1, 0, 2)))


def anc_residual(provider: FieldProvider, point: Sequence[float],
                 geo: Optional[PointGeometry] = None) -> float:
    """g((nabla^g_X A)Y, Z) = -1/3 dF(AX,AY,Z) + 1/6 eta(Z) deta(Y,AX) - 1/2 eta(Y) deta(AZ,X)."""
    geo = _geometry(provider, point, geo)
    A, eta, deta = geo.A, geo.eta, geo.deta
    y_ax = np.einsum("yp,px->xy", deta, A)
    az_x = np.einsum("px,pz->xz", deta, A)
    return residual(geo.L_g,
                    slot_apply(geo.dF, A, A, None) / 3.0,
                    -np.einsum("xy,z->xyz", y_ax, eta) / 6.0,
                    0.5 * np.einsum("y,xz->xyz", eta, az_x))


def _h_jet(geo: PointGeometry) -> Jet:
    """h(X, Y) = g(X, (Q - Id) Y)."""
    b = geo.bundle
    return Jet.einsum("ak,kb->ab", b["g"], b["Q"] - np.eye(geo.dim))


def n5_tensor(geo: PointGeometry) -> np.ndarray:
    """N5 on the coordinate frame, where [e_a, A e_c] = d_a A^k_c e_k and [e_b, e_c] = 0."""
    hj = _h_jet(geo)
    h, dh = hj.value, hj.parts[1]                      # dh[a, b, m] = d_m h_ab
    A = geo.A
    dA = geo.bundle["A"].parts[1]                      # dA[k, c, m] = d_m A^k_c
    return (np.einsum("mc,abm->abc", A, dh)
            - np.einsum("mb,acm->abc", A, dh)
            + np.einsum("kca,kb->abc", dA, h)
            - np.einsum("kba,kc->abc", dA, h)
            + np.einsum("kcb,ka->abc", dA, h)
            - np.einsum("kbc,ka->abc", dA, h))


def nwac_tensor(geo: PointGeometry) -> np.ndarray:
    return geo.N_A + np.einsum("ab,c->abc", geo.deta, geo.eta)


def special_tensors(provider: FieldProvider, point: Sequence[float],
                    geo: Optional[PointGeometry] = None) -> Dict[str, np.ndarray]:
    geo = _geometry(provider, point, geo)
    if not geo.contact:
        raise MissingFieldError("xi", "N5 and N_wac")
    return {"N5": n5_tensor(geo), "Nwac": nwac_tensor(geo), "deta": geo.deta}


def mainw_residual(geo: PointGeometry) -> float:
    A, eta, deta, dF = geo.A, geo.eta, geo.deta, geo.dF
    nwac_ax = np.einsum("yzx->xyz", slot_apply(nwac_tensor(geo), None, None, A))
    ay_z = slot_apply(deta, A, None)
    x_ay = slot_apply(deta, None, A)
    return residual(2.0 * geo.L_g,
                    -n5_tensor(geo), -dF, slot_apply(dF, None, A, A), -nwac_ax,
                    -np.einsum("x,yz->xyz", eta, ay_z - ay_z.T),
                    np.einsum("xy,z->xyz", x_ay, eta),
                    -np.einsum("xz,y->xyz", x_ay, eta))


def total_skew_residual(t: np.ndarray) -> float:
    return max(residual(t, np.transpose(t, (1, 0, 2))), residual(t, np.transpose(t, (0, 2, 1))))


def n5_at_xi(provider: FieldProvider, point: Sequence[float],
             geo: Optional[PointGeometry] = None) -> Dict[str, float]:
    """
    N5(X, xi, Z) against g((L_xi A)Z, (Q - Id)X) and N5(xi, Y, Z) against
    g([xi, AZ], (Q - Id)Y) - g([xi, AY], (Q - Id)Z).
    """
    geo = _geometry(provider, point, geo)
    N5 = n5_tensor(geo)
    h = _h_jet(geo).value
    b = geo.bundle
    xi = b["xi"]
    LA = lie_derivative_A(b["A"], xi)
    br = (np.einsum("m,kcm->kc", xi.value, b["A"].parts[1])
          - np.einsum("mc,km->kc", geo.A, xi.parts[1]))   # [xi, A e_c]
    middle = residual(np.einsum("abc,b->ac", N5, xi.value), -np.einsum("kc,ka->ac", LA, h))
    first = residual(np.einsum("abc,a->bc", N5, xi.value),
                     -np.einsum("kc,kb->bc", br, h), np.einsum("kb,kc->bc", br, h))
    return {"xi_middle": middle, "xi_first": first}


def reeb_checks(provider: FieldProvider, point: Sequence[float],
                geo: Optional[PointGeometry] = None) -> Dict[str, float]:
    geo = _geometry(provider, point, geo)
    if not geo.contact:
        raise MissingFieldError("xi", "Reeb field checks")
    Dxi = geo.nabla_g("xi")                            # Dxi[m, k] = (nabla^g_m xi)^k
    xi, g, deta = geo.xi, geo.g, geo.deta
    kill = np.einsum("mk,ky->my", Dxi, g)              # g(nabla^g_X xi, Y)
    return {
        "geodesic": residual(np.einsum("m,mk->k", xi, Dxi)),
        "killing": residual(kill, kill.T),
        "deta_xi": residual(np.einsum("ab,b->a", deta, xi)),
        "parallel": residual(Dxi),
        "deta_lc": residual(deta, -(kill - kill.T)),
    }
