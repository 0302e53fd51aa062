"""
Identity catalog: every checked identity as a pointwise residual.

Each row names the fields it needs, the suites it belongs to and the metric
signature it makes sense for. Residuals are normalised sup norms
(utils.tensor.residual), so 0 means the identity holds exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from geometry.connections import exterior_derivative_jet
from geometry.einstein import (
    contorsion_from_torsion,
    einstein_contorsion,
    emc_contorsion_residual,
    general_emc_connection,
)
from geometry.nijenhuis import nijenhuis_q_via_connection, nijenhuis_via_connection
from geometry.pointwise import PointGeometry
from geometry.spectral import SpectralSplit, involutivity_residual, spectrum_residual
from geometry.structures import (
    anc_residual,
    axiom_residual,
    check_axioms,
    mainw_residual,
    n5_at_xi,
    n5_tensor,
    nearly_kahler_residual,
    nwac_tensor,
    reeb_checks,
    total_skew_residual,
)
from utils.errors import UnknownIdentity
from utils.tensor import residual, slot_apply

SUITES = ("emc", "hermitian", "acm", "para", "splitting")

Residual = Callable[[PointGeometry, Optional[SpectralSplit]], float]


@dataclass(frozen=True)
class Identity:
    id: str
    formula: str
    suites: Tuple[str, ...]
    fn: Residual
    requires: Tuple[str, ...] = ()
    excludes: Tuple[str, ...] = ()
    signature: Optional[str] = None          # "riemannian", "indefinite" or None
    uses_split: bool = False
    unit_q: bool = False                     # coordinate-frame evaluation only valid for Q = Id
    paper_ref: str = ""


# helpers

def _dF(geo: PointGeometry, *mats) -> np.ndarray:
    return slot_apply(geo.dF, *mats)


def _T(geo: PointGeometry, *mats) -> np.ndarray:
    return slot_apply(geo.T, *mats)


def _cyc(t: np.ndarray, rule: str) -> np.ndarray:
    return np.einsum(rule, t)


# Einstein metricity

def _emc(geo, split):
    return residual(geo.emc)


def _emc_t(geo, split):
    A = geo.A
    return residual(geo.nabla_e("G"), geo.T, -_T(geo, None, None, A))


def _emc_k(geo, split):
    return residual(emc_contorsion_residual(geo.K, geo.nabla_g("F"), geo.A))


def _ein_g(geo, split):
    T, TA = geo.T, _T(geo, None, None, geo.A)
    rhs = -0.5 * (T + _cyc(T, "xzy->xyz") - TA - _cyc(TA, "xzy->xyz"))
    return residual(geo.nabla_e("g"), -rhs)


def _ein_f_torsion_form(geo) -> np.ndarray:
    """(nabla_X F)(Y, Z) in the pure torsion form."""
    T, TA = geo.T, _T(geo, None, None, geo.A)
    return 0.5 * (_cyc(T, "xzy->xyz") - T + TA - _cyc(TA, "xzy->xyz"))


def _ein_f_dF_form(geo) -> np.ndarray:
    """(nabla_Z F)(X, Y) in the dF-plus-torsion form, indexed [x, y, z]."""
    T, TA = geo.T, _T(geo, None, None, geo.A)
    return 0.5 * (geo.dF + T - _cyc(TA, "zyx->xyz") + _cyc(TA, "zxy->xyz"))


def _ein_f(geo, split):
    return residual(geo.nabla_e("F"), -_ein_f_torsion_form(geo))


def _ein_f2(geo, split):
    # second display re-read with the differentiation slot first: D2(Y, Z, X)
    d2 = _cyc(_ein_f_dF_form(geo), "bca->abc")
    return max(residual(_ein_f_torsion_form(geo), -d2), residual(geo.nabla_e("F"), -d2))


def _skew1(geo, split):
    A = geo.A
    A2 = A @ A
    rhs = [
        (2.0 / 3.0, _dF(geo, None, None, A)),
        (1.0 / 3.0, _dF(geo, A, None, None)),
        (1.0 / 3.0, _dF(geo, None, A, None)),
        (1.0 / 3.0, _dF(geo, A, A, A)),
        (-1.0 / 6.0, _dF(geo, A2, None, A)),
        (-1.0 / 6.0, _dF(geo, A2, A, None)),
        (-1.0 / 6.0, _dF(geo, None, A2, A)),
        (1.0 / 6.0, _dF(geo, None, A, A2)),
        (-1.0 / 6.0, _dF(geo, A, A2, None)),
        (1.0 / 6.0, _dF(geo, A, None, A2)),
    ]
    return residual(geo.N_A, *[-c * t for c, t in rhs])


def _ff2_rhs(geo) -> List[np.ndarray]:
    A = geo.A
    return [geo.dF / 3.0, _dF(geo, None, A, A) / 3.0,
            -_dF(geo, A, None, A) / 6.0, -_dF(geo, A, A, None) / 6.0]


def _ff2(geo, split):
    neg = [-t for t in _ff2_rhs(geo)]
    return max(residual(geo.L_g, *neg), residual(geo.nabla_g("F"), *neg))


def _tordf(geo, split):
    return residual(geo.T, geo.dF / 3.0)


def _skew0_g(geo, split):
    A = geo.A
    return residual(geo.nabla_e("g"), _dF(geo, None, None, A) / 6.0, -_dF(geo, None, A, None) / 6.0)


def _skew0_f(geo, split):
    A = geo.A
    return residual(geo.nabla_e("F"), -geo.dF / 3.0,
                    _dF(geo, None, None, A) / 6.0, _dF(geo, None, A, None) / 6.0)


def _contorsion_t(geo, split):
    return residual(geo.K, -contorsion_from_torsion(geo.T, geo.A))


def _minus_third_dF(b):
    return (-1.0 / 3.0) * exterior_derivative_jet(b["F"])


def _einstein_two_path(geo, split):
    general = general_emc_connection(geo.provider, _minus_third_dF)
    gam2 = general.builder(geo.bundle).value
    return max(residual(geo.gam, -gam2), residual(geo.K, -einstein_contorsion(geo.dF, geo.A)))


def _nuj1_xcheck(geo, split):
    via = nijenhuis_via_connection(geo.A, geo.nabla_e("A"), geo.T_vec, geo.g)
    return residual(geo.N_A, -via)


def _two_path_nuj(geo, split):
    n = geo.dim
    via = nijenhuis_via_connection(geo.A, geo.nabla_g("A"), np.zeros((n, n, n)), geo.g)
    return residual(geo.N_A, -via)


def _nujq_xcheck(geo, split):
    via = nijenhuis_q_via_connection(geo.Q, geo.nabla_e("Q"), geo.T, geo.g)
    return residual(geo.N_Q, -via)


def _lc_compat(geo, split):
    gam = geo.gam_g
    return max(residual(geo.nabla_g("g")), residual(gam, -np.transpose(gam, (0, 2, 1))))


def _lc_bianchi(geo, split):
    R = geo.R_g
    return residual(R, np.transpose(R, (0, 2, 3, 1)), np.transpose(R, (0, 3, 1, 2)))


# weak Hermitian

def _wah(geo, split):
    return axiom_residual(check_axioms(geo.provider, "weak_hermitian", geo.point, geo))


def _three_slot(geo, P) -> float:
    t1, t2, t3 = _T(geo, P, None, None), _T(geo, None, P, None), _T(geo, None, None, P)
    return max(residual(t1, -t2), residual(t2, -t3))


def _a_torsion(geo, split):
    return _three_slot(geo, geo.A)


def _q_torsion(geo, split):
    return _three_slot(geo, geo.Q)


def _p27_nabla_a(geo, split):
    return max(residual(geo.L_g, geo.T), residual(geo.nabla_e("g")))


def _p27_na(geo, split):
    return residual(geo.N_A, -4.0 / 3.0 * _dF(geo, None, None, geo.A))


def _nk(geo, split):
    return nearly_kahler_residual(geo.provider, geo.point, geo)


def _nabla_q_g(geo, split):
    return residual(geo.nabla_g("Q"))


def _nabla_q(geo, split):
    return residual(geo.nabla_e("Q"))


def _eq32(geo, split):
    A = geo.A
    ta = _T(geo, A, None, None)
    return max(residual(ta, _dF(geo, A, None, None) / 3.0), residual(ta, geo.N_A / 4.0))


# weak almost contact metric

def _acm(geo, split):
    return axiom_residual(check_axioms(geo.provider, "weak_acm", geo.point, geo))


def _anc(geo, split):
    return anc_residual(geo.provider, geo.point, geo)


def _reeb(key: str) -> Residual:
    def fn(geo, split):
        return reeb_checks(geo.provider, geo.point, geo)[key]
    return fn


def _mainw(geo, split):
    return mainw_residual(geo)


def _n51(geo, split):
    N5 = n5_tensor(geo)
    A = geo.A
    return max(residual(N5, geo.dF / 3.0, _dF(geo, None, A, A) / 3.0), total_skew_residual(N5))


def _nwac_skew(geo, split):
    Nw = nwac_tensor(geo)
    return max(total_skew_residual(Nw), residual(np.einsum("abc,c->ab", Nw, geo.xi)))


def _skewacb1(geo, split):
    return residual(nwac_tensor(geo), -4.0 / 3.0 * _dF(geo, geo.A, None, None))


def _t38(geo, split):
    A = geo.A
    return max(
        residual(geo.T, geo.dF / 3.0),
        residual(geo.T, slot_apply(geo.N_A, A, A, A) / 4.0),
        residual(geo.nabla_e("g")),
        residual(geo.nabla_e("F"), -geo.dF / 3.0, _dF(geo, None, None, A) / 3.0),
        residual(geo.K, geo.dF / 6.0),
    )


def _n5_xi(geo, split):
    return max(n5_at_xi(geo.provider, geo.point, geo).values())


# para structures

def _para_h(geo, split):
    return axiom_residual(check_axioms(geo.provider, "weak_para_hermitian", geo.point, geo))


def _para_c(geo, split):
    return axiom_residual(check_axioms(geo.provider, "weak_para_contact", geo.point, geo))


# eigen-distributions of Q

def _spectrum(geo, split):
    return spectrum_residual(split, geo.provider, geo.point)


def _invol(geo, split):
    rows = involutivity_residual(split, geo.provider, geo.point)
    return max(max(r["bracket"], r["geodesic"]) for r in rows)


EMC = ("emc",)
HERM = ("hermitian",)
ACM = ("acm",)

_ROWS: Tuple[Identity, ...] = (
    Identity("emc", "d_m G_ij - Gamma^p_im G_pj - Gamma^p_mj G_ip = 0 for the Einstein connection",
             ("emc", "hermitian"), _emc),
    Identity("emc_t", "(nabla_X G)(Y,Z) = -T(X,Y,Z) + T(X,Y,AZ)", EMC, _emc_t),
    Identity("emc_k", "-K(Y,X,Z) - K(X,Z,Y) + (nabla^g_X F)(Y,Z) + K(Y,X,AZ) - K(X,Z,AY) = 0", EMC, _emc_k),
    Identity("ein_g", "(nabla_X g)(Y,Z) = -1/2 [T(X,Y,Z) + T(X,Z,Y) - T(X,Y,AZ) - T(X,Z,AY)]", EMC, _ein_g),
    Identity("ein_f", "(nabla_X F)(Y,Z) = 1/2 [T(X,Z,Y) - T(X,Y,Z) + T(X,Y,AZ) - T(X,Z,AY)]", EMC, _ein_f),
    Identity("ein_f2", "torsion form of nabla F = 1/2 [dF(X,Y,Z) + T(X,Y,Z) - T(Z,Y,AX) + T(Z,X,AY)]",
             EMC, _ein_f2),
    Identity("skew1", "N_A expressed through dF and A (existence criterion of the Einstein connection)",
             ("emc", "hermitian"), _skew1),
    Identity("ff2", "(nabla^g_X F)(Y,Z) = g((nabla^g_X A)Y,Z) = 1/3 dF(X,Y,Z) + 1/3 dF(X,AY,AZ) "
             "- 1/6 dF(AX,Y,AZ) - 1/6 dF(AX,AY,Z)", ("emc", "hermitian"), _ff2),
    Identity("tordf", "T(X,Y,Z) = -1/3 dF(X,Y,Z)", ("emc", "hermitian"), _tordf),
    Identity("skew0_g", "(nabla_X g)(Y,Z) = -1/6 [dF(X,Y,AZ) - dF(X,AY,Z)]", ("emc", "hermitian"), _skew0_g),
    Identity("skew0_f", "(nabla_X F)(Y,Z) = 1/6 [2 dF(X,Y,Z) - dF(X,Y,AZ) - dF(X,AY,Z)]",
             ("emc", "hermitian"), _skew0_f),
    Identity("contorsion_t", "2K(X,Y,Z) = T(X,Y,Z) - T(X,Z,AY) - T(Y,Z,AX)", EMC, _contorsion_t),
    Identity("einstein_two_path", "Einstein connection = general EMC connection with T = -1/3 dF; "
             "K = 1/6 [dF(AX,Y,Z) - dF(X,AY,Z) - dF(X,Y,Z)]", EMC, _einstein_two_path),
    Identity("nuj1_xcheck", "coordinate N_A = N_A through the Einstein connection and its torsion",
             EMC, _nuj1_xcheck),
    Identity("two_path_nuj", "coordinate N_A = N_A through the Levi-Civita connection", EMC, _two_path_nuj),
    Identity("nujq_xcheck", "coordinate N_Q = N_Q through the Einstein connection and its torsion",
             EMC, _nujq_xcheck),
    Identity("lc_compat", "nabla^g g = 0 and Gamma^g symmetric", EMC, _lc_compat),
    Identity("lc_bianchi", "R^i_klm + R^i_lmk + R^i_mkl = 0 for the Levi-Civita connection", EMC, _lc_bianchi),

    Identity("wah", "A^2 = -Q, g(AX,AY) = g(QX,Y), F = g(A.,.), Q self-adjoint positive, [A,Q] = 0",
             ("hermitian", "splitting"), _wah, excludes=("xi",), signature="riemannian"),
    Identity("a_torsion", "T(AX,Y,Z) = T(X,AY,Z) = T(X,Y,AZ)", HERM, _a_torsion),
    Identity("q_torsion", "T(QX,Y,Z) = T(X,QY,Z) = T(X,Y,QZ)", HERM, _q_torsion),
    Identity("p27_nablaA", "g((nabla^g_X A)Y,Z) = -T(X,Y,Z) and nabla g = 0", HERM, _p27_nabla_a),
    Identity("p27_NA", "N_A(X,Y,Z) = 4/3 dF(X,Y,AZ)", HERM, _p27_na),
    Identity("nk", "g((nabla^g_X A)Y,Z) + g((nabla^g_Y A)X,Z) = 0", HERM, _nk),
    Identity("nablaQ_g", "nabla^g Q = 0", ("hermitian", "acm", "splitting"), _nabla_q_g),
    Identity("nablaQ", "nabla Q = 0 for the Einstein connection", ("hermitian", "acm"), _nabla_q),
    Identity("eq32", "T(AX,Y,Z) = -1/3 dF(AX,Y,Z) = -1/4 N_A(X,Y,Z)", HERM, _eq32),

    Identity("acm", "A^2 = -Q + eta(x)xi, g(AX,AY) = g(QX,Y) - eta(X)eta(Y), A xi = 0, Q xi = xi, eta(xi) = 1",
             ACM, _acm, requires=("xi",), signature="riemannian"),
    Identity("anc", "g((nabla^g_X A)Y,Z) = -1/3 dF(AX,AY,Z) + 1/6 eta(Z) deta(Y,AX) - 1/2 eta(Y) deta(AZ,X)",
             ACM, _anc, requires=("xi",)),
    Identity("reeb_geo", "nabla^g_xi xi = 0", ACM, _reeb("geodesic"), requires=("xi",)),
    Identity("reeb_kill", "g(nabla^g_X xi, Y) + g(nabla^g_Y xi, X) = 0", ACM, _reeb("killing"), requires=("xi",)),
    Identity("deta_xi", "deta(X, xi) = 0", ACM, _reeb("deta_xi"), requires=("xi",)),
    Identity("reeb_par", "nabla^g xi = 0", ACM, _reeb("parallel"), requires=("xi",)),
    Identity("deta_lc", "deta(X,Y) = g(nabla^g_X xi, Y) - g(nabla^g_Y xi, X)", ACM, _reeb("deta_lc"),
             requires=("xi",)),
    Identity("mainw", "2 g((nabla^g_X A)Y,Z) = N5(X,Y,Z) + dF(X,Y,Z) - dF(X,AY,AZ) + N_wac(Y,Z,AX) + deta terms",
             ACM, _mainw, requires=("xi",), unit_q=True),
    Identity("n51", "N5 totally skew and N5(X,Y,Z) = -1/3 dF(X,Y,Z) - 1/3 dF(X,AY,AZ)", ACM, _n51,
             requires=("xi",)),
    Identity("nwac_skew", "N_wac totally skew and N_wac(X,Y,xi) = 0", ACM, _nwac_skew, requires=("xi",)),
    Identity("skewacB1", "N_wac(X,Y,Z) = 4/3 dF(AX,Y,Z)", ACM, _skewacb1, requires=("xi",)),
    Identity("t38", "T = -1/3 dF = -1/4 N_A(A.,A.,A.), nabla g = 0, (nabla_X F)(Y,Z) = 1/3 [dF(X,Y,Z) - dF(X,Y,AZ)], "
             "K = -1/6 dF", ACM, _t38, requires=("xi",)),
    Identity("n5_xi", "N5(X,xi,Z) = g((L_xi A)Z, (Q-Id)X) and N5(xi,Y,Z) = g([xi,AZ],(Q-Id)Y) - g([xi,AY],(Q-Id)Z)",
             ACM, _n5_xi, requires=("xi",)),

    Identity("para_h", "A^2 = Q, g(AX,AY) = -g(QX,Y), F = g(A.,.), Q self-adjoint positive, [A,Q] = 0",
             ("para",), _para_h, excludes=("xi",), signature="indefinite"),
    Identity("para_c", "A^2 = Q - eta(x)xi, g(AX,AY) = -g(QX,Y) + eta(X)eta(Y), A xi = 0, Q xi = xi",
             ("para",), _para_c, requires=("xi",), signature="indefinite"),

    Identity("spectrum", "eigenvalues of Q constant with constant multiplicities", ("splitting",), _spectrum,
             signature="riemannian", uses_split=True),
    Identity("invol", "eigen-distributions of Q involutive and totally geodesic", ("splitting",), _invol,
             signature="riemannian", uses_split=True),
)

REFERENCES_PATH = Path(__file__).resolve().parent / "references.json"
REFERENCES = json.loads(REFERENCES_PATH.read_text(encoding="utf-8"))

CATALOG: Tuple[Identity, ...] = tuple(
    replace(row, paper_ref=REFERENCES["identities"][row.id]) for row in _ROWS)

_BY_ID: Dict[str, Identity] = {row.id: row for row in CATALOG}


def get_identity(identity_id: str) -> Identity:
    try:
        return _BY_ID[identity_id]
    except KeyError:
        raise UnknownIdentity(f"no identity '{identity_id}' in the catalog") from None


def suite_ids(suite: str) -> List[str]:
    if suite == "all":
        return [row.id for row in CATALOG]
    if suite not in SUITES:
        raise UnknownIdentity(f"unknown suite '{suite}', expected one of {list(SUITES) + ['all']}")
    return [row.id for row in CATALOG if suite in row.suites]
