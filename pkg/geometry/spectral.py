"""
Spectral layer for the structure endomorphism Q.

Q is g-self-adjoint, so with g = L L^T the matrix L^T Q L^-T is symmetric and
is diagonalised by cyclic Jacobi rotations. Its eigenvectors pulled back by
L^-T form a g-orthonormal eigenbasis of Q.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import atan2, cos, sin, sqrt
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from geometry.connections import bracket_jet, christoffel_jet
from manifolds.fields import FieldProvider
from utils.errors import CommutationError, DegenerateMetricError, MultiplicityError, NonConstantSpectrum
from utils.jets import Jet
from utils.tensor import residual, sup_norm

logger = logging.getLogger(__name__)

JACOBI_THRESHOLD = 1e-14
JACOBI_MAX_SWEEPS = 64
OFFDIAG_FLOOR = 1e-15
EIG_CLUSTER_TOL = 1e-6
EIG_GAP_MIN = 1e-4
AQ_COMMUTE_TOL = 1e-8
KERNEL_TOL = 1e-8
SEED_TIE_TOL = 1e-9
BASIS_TOL = 1e-8


def jacobi_eigh(S: np.ndarray, threshold: float = JACOBI_THRESHOLD) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a symmetric matrix."""
    S = 0.5 * (np.array(S, dtype=float) + np.array(S, dtype=float).T)
    m = S.shape[0]
    V = np.eye(m)
    scale = 1.0 + sup_norm(S)

    for sweep in range(JACOBI_MAX_SWEEPS):
        encore = False
        for p in range(m):
            for q in range(p + 1, m):
                if abs(S[p, q]) <= OFFDIAG_FLOOR * scale:
                    continue
                am = S[p, p] - S[q, q]
                ap = 2.0 * S[p, q]
                ton = am * am - ap * ap
                toff = 2.0 * am * ap
                theta = 0.5 * atan2(toff, ton + sqrt(ton * ton + toff * toff))
                c = cos(theta)
                s = sin(theta)
                if abs(s) <= threshold:
                    continue
                encore = True
                # columns, rows, then the accumulated rotation
                cp, cq = S[:, p].copy(), S[:, q].copy()
                S[:, p], S[:, q] = c * cp + s * cq, -s * cp + c * cq
                rp, rq = S[p, :].copy(), S[q, :].copy()
                S[p, :], S[q, :] = c * rp + s * rq, -s * rp + c * rq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp + s * vq, -s * vp + c * vq
        if not encore:
            break
    else:
        logger.warning("Jacobi rotations did not settle after %d sweeps", JACOBI_MAX_SWEEPS)

    w = np.diag(S).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def generalized_eigh(g: np.ndarray, Q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of Q and a g-orthonormal eigenvector basis (columns)."""
    try:
        L = np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError as e:
        raise DegenerateMetricError(f"the eigenbasis of Q needs a positive definite metric ({e})") from e
    Linv = np.linalg.inv(L)
    S = L.T @ Q @ Linv.T
    w, V = jacobi_eigh(S)
    return w, Linv.T @ V


def cluster_eigenvalues(w: Sequence[float], tol: float = EIG_CLUSTER_TOL) -> List[Tuple[float, int]]:
    """Group sorted eigenvalues into (mean value, multiplicity)."""
    groups: List[List[float]] = []
    for x in sorted(w):
        if groups and x - groups[-1][-1] <= tol:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(float(np.mean(grp)), len(grp)) for grp in groups]


# A-Q basis

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class AQBasis:
    point: np.ndarray
    vectors: np.ndarray                       # columns e_1, A e_1 / |A e_1|, ..., xi_1, ...
    eigenvalues: Tuple[float, ...]            # Q-eigenvalue of each column
    kernel_dim: int

    @property
    def spectrum(self) -> List[Tuple[float, int]]:
        return cluster_eigenvalues(self.eigenvalues)

    def expected_A(self) -> np.ndarray:
        n = len(self.eigenvalues)
        out = np.zeros((n, n))
        for k in range(0, n - self.kernel_dim, 2):
            out[k:k + 2, k:k + 2] = sqrt(self.eigenvalues[k]) * J2
        return out

    def defects(self, g: np.ndarray, A: np.ndarray, Q: np.ndarray) -> Dict[str, np.ndarray]:
        B = self.vectors
        gram = B.T @ g @ B
        Binv = B.T @ g                        # valid once the basis is g-orthonormal
        return {
            "orthonormal": gram - np.eye(B.shape[1]),
            "q_diagonal": Binv @ Q @ B - np.diag(self.eigenvalues),
            "a_blocks": Binv @ A @ B - self.expected_A(),
        }

    def residuals(self, g: np.ndarray, A: np.ndarray, Q: np.ndarray) -> Dict[str, float]:
        return {key: sup_norm(d) for key, d in self.defects(g, A, Q).items()}


def _orthonormal_span(M: np.ndarray, tol: float = KERNEL_TOL) -> np.ndarray:
    if M.size == 0:
        return M
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol * (1.0 + (s[0] if s.size else 0.0))]


def _pair_up(Ahat: np.ndarray, span: np.ndarray, eigenvalue: float) -> List[np.ndarray]:
    """Seed 2-planes {e, Ae/|Ae|} greedily inside `span` (orthonormal columns)."""
    out: List[np.ndarray] = []
    m = Ahat.shape[0]
    while span.shape[1] > 0:
        if span.shape[1] == 1:
            raise MultiplicityError(
                f"eigenspace of Q for eigenvalue {eigenvalue:.6g} leaves an odd A-invariant remainder",
                eigenvalue)
        proj = span @ span.T                  # coordinate vectors projected into the remaining span
        scores = np.array([np.linalg.norm(Ahat @ proj[:, j]) for j in range(m)])
        best = int(np.flatnonzero(scores >= scores.max() - SEED_TIE_TOL)[0])
        e = proj[:, best] / np.linalg.norm(proj[:, best])
        Ae = Ahat @ e
        f = Ae / np.linalg.norm(Ae)
        out.extend([e, f])
        rest = span - np.outer(e, e @ span) - np.outer(f, f @ span)
        span = _orthonormal_span(rest)
    return out


def aq_basis(provider: FieldProvider, point: Sequence[float]) -> AQBasis:
    b = provider.bundle(point, 0)
    g, A, Q = b["g"].value, b["A"].value, b["Q"].value
    commute = residual(A @ Q, -(Q @ A))
    if commute > AQ_COMMUTE_TOL:
        raise CommutationError(f"A and Q do not commute at {tuple(np.round(point, 6))} (residual {commute:.3e})")

    w, E = generalized_eigh(g, Q)
    pairs: List[Tuple[np.ndarray, float]] = []
    kernel: List[Tuple[np.ndarray, float]] = []
    start = 0
    for value, mult in cluster_eigenvalues(w):
        Ec = E[:, start:start + mult]
        start += mult
        Ahat = Ec.T @ g @ A @ Ec              # A restricted to the eigenspace, orthonormal coords
        _, s, Vt = np.linalg.svd(Ahat)
        null = s <= KERNEL_TOL * (1.0 + (s[0] if s.size else 0.0))
        for v in Vt[null]:
            kernel.append((Ec @ v, value))
        span = Vt[~null].T if (~null).any() else np.zeros((mult, 0))
        for v in _pair_up(Ahat, span, value):
            pairs.append((Ec @ v, value))

    columns = [v for v, _ in pairs] + [v for v, _ in kernel]
    values = tuple(x for _, x in pairs) + tuple(x for _, x in kernel)
    basis = AQBasis(np.asarray(point, dtype=float), np.column_stack(columns), values, len(kernel))
    defects = basis.defects(g, A, Q)
    bound = BASIS_TOL * (1.0 + sup_norm(Q))
    failed = [key for key, d in defects.items() if sup_norm(d) > bound]
    if failed:
        # worst column over the failing checks
        col = np.max(np.stack([np.abs(defects[key]).max(axis=0) for key in failed]), axis=0)
        worst = int(np.argmax(col))
        logger.debug("A-Q basis at %s: %s", tuple(np.round(point, 4)), basis.residuals(g, A, Q))
        raise MultiplicityError(
            f"no A-Q basis at {tuple(np.round(point, 6))}: {', '.join(failed)} off by {col[worst]:.3e}",
            values[worst])
    return basis


# spectral split over samples

@dataclass(frozen=True)
class SpectralSplit:
    eigenvalues: Tuple[float, ...]
    multiplicities: Tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def expanded(self) -> np.ndarray:
        return np.repeat(np.asarray(self.eigenvalues), self.multiplicities)

    def lagrange_factors(self, i: int) -> List[Tuple[float, float]]:
        """(lambda_j, 1 / (lambda_i - lambda_j)) for j != i."""
        li = self.eigenvalues[i]
        return [(lj, 1.0 / (li - lj)) for j, lj in enumerate(self.eigenvalues) if j != i]

    def projector(self, i: int, Q: np.ndarray) -> np.ndarray:
        n = Q.shape[0]
        P = np.eye(n)
        for lj, c in self.lagrange_factors(i):
            P = c * (P @ (Q - lj * np.eye(n)))
        return P

    def projector_jet(self, i: int, Q: Jet) -> Jet:
        n = Q.shape[0]
        P = Jet.constant(np.eye(n), Q.n, Q.order)
        for lj, c in self.lagrange_factors(i):
            P = c * Jet.einsum("ab,bc->ac", P, Q - lj * np.eye(n))
        return P


def point_spectrum(provider: FieldProvider, point: Sequence[float]) -> np.ndarray:
    b = provider.bundle(point, 0)
    w, _ = generalized_eigh(b["g"].value, b["Q"].value)
    return w


def spectral_split(provider: FieldProvider, points: Sequence[Sequence[float]]) -> SpectralSplit:
    W = np.array([point_spectrum(provider, p) for p in points])
    spread = float(np.max(W.max(axis=0) - W.min(axis=0))) if len(W) else 0.0
    if spread > EIG_CLUSTER_TOL:
        raise NonConstantSpectrum(spread)
    clusters = cluster_eigenvalues(W.mean(axis=0))
    for (a, _), (b, _) in zip(clusters, clusters[1:]):
        if b - a < EIG_GAP_MIN:
            raise MultiplicityError(f"eigenvalues {a:.6g} and {b:.6g} are too close for spectral projectors", b)
    split = SpectralSplit(tuple(v for v, _ in clusters), tuple(m for _, m in clusters))
    logger.info("spectral split over %d points: %s", len(W), list(zip(split.eigenvalues, split.multiplicities)))
    return split


def spectrum_residual(split: SpectralSplit, provider: FieldProvider, point: Sequence[float]) -> float:
    return float(np.max(np.abs(point_spectrum(provider, point) - split.expanded())))


def involutivity_residual(split: SpectralSplit, provider: FieldProvider,
                          point: Sequence[float]) -> List[Dict[str, float]]:
    """
    For every eigenvalue, the parts of [X, Y] and of nabla^g_X Y outside the
    eigen-distribution, with X = P(Q) d_a and Y = P(Q) d_b over all a, b.
    """
    b = provider.bundle(point, 1)
    Qj = b["Q"]
    gam_g = christoffel_jet(b["g"], b["ginv"]).value
    n = provider.dim
    out = []
    for i, value in enumerate(split.eigenvalues):
        P = split.projector_jet(i, Qj)
        off = np.eye(n) - P.value
        bracket = 0.0
        geodesic = 0.0
        for a in range(n):
            X = P[:, a]
            for c in range(n):
                Y = P[:, c]
                br = bracket_jet(X, Y).value
                bracket = max(bracket, sup_norm(off @ br))
                nab = (np.einsum("m,km->k", X.value, Y.parts[1])
                       + np.einsum("kmp,m,p->k", gam_g, X.value, Y.value))
                geodesic = max(geodesic, sup_norm(off @ nab))
        out.append({"eigenvalue": value, "bracket": bracket, "geodesic": geodesic})
    return out


def involutivity_summary(split: SpectralSplit, provider: FieldProvider,
                         points: Sequence[Sequence[float]]) -> Dict[float, Dict[str, float]]:
    """Worst bracket and geodesic parts per eigenvalue over the points, in eigenvalue order."""
    rows = [row for p in points for row in involutivity_residual(split, provider, p)]
    frame = pd.DataFrame(rows, columns=["eigenvalue", "bracket", "geodesic"])
    worst = frame.groupby("eigenvalue").max().reindex(list(split.eigenvalues), fill_value=0.0)
    return {v: {"bracket": float(worst.at[v, "bracket"]), "geodesic": float(worst.at[v, "geodesic"])}
            for v in split.eigenvalues}
