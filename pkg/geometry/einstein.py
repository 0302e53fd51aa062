"""
Einstein's connections: linear connections satisfying the Einstein metricity condition

    d_m G_ij - Gamma^p_im G_pj - Gamma^p_mj G_ip = 0.

Two constructions are provided. The general one takes a prescribed torsion
T_cov and adds half of T(X,Y,Z) - T(X,Z,AY) - T(Y,Z,AX) to Levi-Civita. The
skew-torsion one is determined by dF alone and adds
(1/6)[dF(AX,Y,Z) - dF(X,Y,Z) - dF(X,AY,Z)].
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from geometry.connections import (
    Bundle,
    ConnectionField,
    christoffel_jet,
    exterior_derivative_jet,
    torsion_from_coefficients,
)
from manifolds.fields import FieldProvider
from utils.errors import TorsionSymmetryError
from utils.jets import Jet
from utils.tensor import TensorValue, slot_apply, sup_norm

logger = logging.getLogger(__name__)

SKEW_TOL = 1e-12

TorsionField = Union[np.ndarray, Jet, Callable[[Bundle], Jet]]


def einstein_builder(b: Bundle) -> Jet:
    A, ginv = b["A"], b["ginv"]
    dF = exterior_derivative_jet(b["F"])
    B = (Jet.einsum("pi,pjs->ijs", A, dF) - dF - Jet.einsum("pj,ips->ijs", A, dF))
    return christoffel_jet(b["g"], ginv) + (1.0 / 6.0) * Jet.einsum("ks,ijs->kij", ginv, B)


@dataclass(frozen=True)
class EinsteinConnection(ConnectionField):
    """The skew-torsion Einstein connection; its torsion is -dF/3."""

    def torsion(self, point: Sequence[float], bundle: Optional[Bundle] = None) -> TensorValue:
        if bundle is None:
            bundle = self.provider.bundle(point, 1)
        gam = self.builder(bundle).value
        _, T_cov = torsion_from_coefficients(gam, bundle["g"].value)
        return TensorValue(self.provider.dim, (0, 3), T_cov)


def einstein_connection(provider: FieldProvider) -> EinsteinConnection:
    return EinsteinConnection("einstein", provider, False, einstein_builder)


def _torsion_jet(T: TorsionField, b: Bundle) -> Jet:
    if callable(T) and not isinstance(T, Jet):
        return T(b)
    if isinstance(T, Jet):
        return T
    g = b["g"]
    return Jet.constant(np.asarray(T, dtype=float), g.n, g.order)


def general_emc_connection(provider: FieldProvider, T_cov: TorsionField) -> ConnectionField:
    """Gamma_ijs = Gamma^g_ijs + 1/2 [T_ijs - T_isp A^p_j - T_jsp A^p_i]."""

    def builder(b: Bundle) -> Jet:
        T = _torsion_jet(T_cov, b)
        tv = T.value
        skew = sup_norm(tv + np.transpose(tv, (1, 0, 2)))
        if skew > SKEW_TOL * (1.0 + sup_norm(tv)):
            logger.debug("rejecting prescribed torsion with symmetric part %.3e", skew)
            raise TorsionSymmetryError(f"prescribed torsion is not antisymmetric in its first two slots "
                                       f"(symmetric part {skew:.3e})")
        A = b["A"]
        C = T - Jet.einsum("isp,pj->ijs", T, A) - Jet.einsum("jsp,pi->ijs", T, A)
        return christoffel_jet(b["g"], b["ginv"]) + 0.5 * Jet.einsum("ks,ijs->kij", b["ginv"], C)

    return ConnectionField("general_emc", provider, False, builder)


def contorsion(provider: FieldProvider, conn: ConnectionField, point: Sequence[float],
               bundle: Optional[Bundle] = None) -> TensorValue:
    """K(X, Y, Z) = g(nabla_X Y - nabla^g_X Y, Z)."""
    if bundle is None:
        bundle = provider.bundle(point, 1)
    gam = conn.builder(bundle).value
    gam_g = christoffel_jet(bundle["g"], bundle["ginv"]).value
    K = np.einsum("ks,sij->ijk", bundle["g"].value, gam - gam_g)
    return TensorValue(provider.dim, (0, 3), K)


def contorsion_from_torsion(T: np.ndarray, A: np.ndarray) -> np.ndarray:
    """2K(X, Y, Z) = T(X, Y, Z) - T(X, Z, AY) - T(Y, Z, AX)."""
    return 0.5 * (T - np.einsum("ikp,pj->ijk", T, A) - np.einsum("jkp,pi->ijk", T, A))


def einstein_contorsion(dF: np.ndarray, A: np.ndarray) -> np.ndarray:
    """K = (1/6)[dF(AX, Y, Z) - dF(X, AY, Z) - dF(X, Y, Z)]."""
    return (slot_apply(dF, A, None, None) - slot_apply(dF, None, A, None) - dF) / 6.0


def emc_residual(gam: np.ndarray, G: Jet) -> np.ndarray:
    """E[m, i, j] = d_m G_ij - Gamma^p_im G_pj - Gamma^p_mj G_ip."""
    dG = np.moveaxis(G.parts[1], -1, 0)
    Gv = G.value
    return dG - np.einsum("pim,pj->mij", gam, Gv) - np.einsum("pmj,ip->mij", gam, Gv)


def emc_contorsion_residual(K: np.ndarray, DgF: np.ndarray, A: np.ndarray) -> np.ndarray:
    """
    The metricity condition through the contorsion, indexed [x, y, z]:
        -K(Y,X,Z) - K(X,Z,Y) + (nabla^g_X F)(Y,Z) + K(Y,X,AZ) - K(X,Z,AY)
    """
    KA = slot_apply(K, None, None, A)
    return (-np.einsum("yxz->xyz", K) - np.einsum("xzy->xyz", K) + DgF
            + np.einsum("yxz->xyz", KA) - np.einsum("xzy->xyz", KA))
