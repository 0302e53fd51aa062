"""
Nijenhuis tensors of (1,1) fields, by the coordinate formula and through a connection.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from utils.jets import Jet
from utils.tensor import TensorValue, slot_apply


def nijenhuis_vector(P: Jet) -> np.ndarray:
    """N^k_ij = P^s_i d_s P^k_j - P^s_j d_s P^k_i - P^k_s (d_i P^s_j - d_j P^s_i)."""
    v = P.value
    dP = P.parts[1]                                    # dP[k, j, s] = d_s P^k_j
    return (np.einsum("si,kjs->kij", v, dP)
            - np.einsum("sj,kis->kij", v, dP)
            - np.einsum("ks,sji->kij", v, dP)
            + np.einsum("ks,sij->kij", v, dP))


def lower_last(N: np.ndarray, g: np.ndarray) -> np.ndarray:
    """N(X, Y, Z) = g(N(X, Y), Z) from N^k_ij."""
    return np.einsum("cs,sab->abc", g, N)


def nijenhuis(P: Jet, point: Sequence[float], g: np.ndarray) -> TensorValue:
    N = lower_last(nijenhuis_vector(P), np.asarray(g))
    return TensorValue(N.shape[0], (0, 3), N)


def nijenhuis_via_connection(A: np.ndarray, D: np.ndarray, T: np.ndarray, g: np.ndarray) -> np.ndarray:
    """
    N_A from a connection with torsion T^k_ij and D[m, i, j] = (nabla_{e_m} A)^i_j:
        (nabla_AX A)Y - (nabla_AY A)X - A(nabla_X A)Y + A(nabla_Y A)X
        - T(AX, AY) - A^2 T(X, Y) + A T(AX, Y) + A T(X, AY)
    lowered with g in the last slot.
    """
    N = (np.einsum("ma,mkb->kab", A, D)
         - np.einsum("mb,mka->kab", A, D)
         - np.einsum("kp,apb->kab", A, D)
         + np.einsum("kp,bpa->kab", A, D)
         - np.einsum("ia,jb,kij->kab", A, A, T)
         - np.einsum("kp,pab->kab", A @ A, T)
         + np.einsum("kp,ia,pib->kab", A, A, T)
         + np.einsum("kp,jb,paj->kab", A, A, T))
    return lower_last(N, g)


def nijenhuis_q_via_connection(Q: np.ndarray, DQ: np.ndarray, T_cov: np.ndarray, g: np.ndarray) -> np.ndarray:
    """
    N_Q(X, Y, Z) for a self-adjoint Q, with DQ[m, i, j] = (nabla_{e_m} Q)^i_j:
        g((nabla_QX Q)Y, Z) - g((nabla_QY Q)X, Z) - g((nabla_X Q)Y, QZ) + g((nabla_Y Q)X, QZ)
        - T(QX, QY, Z) - T(X, Y, Q^2 Z) + T(QX, Y, QZ) + T(X, QY, QZ)
    """
    L = np.einsum("ck,mkb->mbc", g, DQ)                # L[m, b, c] = g((nabla_m Q) e_b, e_c)
    return (np.einsum("ma,mbc->abc", Q, L)
            - np.einsum("mb,mac->abc", Q, L)
            - np.einsum("abp,pc->abc", L, Q)
            + np.einsum("bap,pc->abc", L, Q)
            - slot_apply(T_cov, Q, Q, None)
            - slot_apply(T_cov, None, None, Q @ Q)
            + slot_apply(T_cov, Q, None, Q)
            + slot_apply(T_cov, None, Q, Q))
