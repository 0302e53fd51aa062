"""
Pointwise dense tensors on a tangent space.

Components are stored as an ndarray of shape (n,)*(p+q), contravariant
indices first. A (1,1) tensor A is stored as A[k, i] = A^k_i, so it acts on
vector components by matrix multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.errors import SingularMatrixError, SlotMismatch

COND_LIMIT = 1e12


@dataclass(frozen=True)
class TensorValue:
    dim: int
    valence: Tuple[int, int]
    comps: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.comps, dtype=float)
        p, q = self.valence
        expected = (self.dim,) * (p + q)
        if comps.shape != expected:
            raise SlotMismatch(f"components of shape {comps.shape} do not fit valence {self.valence} in dim {self.dim}")
        comps.setflags(write=False)
        object.__setattr__(self, "comps", comps)

    @property
    def rank(self) -> int:
        return self.valence[0] + self.valence[1]

    def is_upper(self, slot: int) -> bool:
        if not 0 <= slot < self.rank:
            raise SlotMismatch(f"slot {slot} does not exist for valence {self.valence}")
        return slot < self.valence[0]

    def flat(self) -> np.ndarray:
        return self.comps.reshape(-1)


def tensor(comps, valence: Tuple[int, int]) -> TensorValue:
    comps = np.asarray(comps, dtype=float)
    dim = comps.shape[0] if comps.ndim else 1
    return TensorValue(dim, tuple(valence), comps)


def tensor_product(a: TensorValue, b: TensorValue) -> TensorValue:
    """Outer product, reordered so that all contravariant slots come first."""
    if a.dim != b.dim:
        raise SlotMismatch("tensor product of different dimensions")
    out = np.multiply.outer(a.comps, b.comps)
    pa, qa = a.valence
    pb, qb = b.valence
    order = (list(range(pa)) + list(range(a.rank, a.rank + pb))
             + list(range(pa, a.rank)) + list(range(a.rank + pb, a.rank + b.rank)))
    return TensorValue(a.dim, (pa + pb, qa + qb), np.transpose(out, order))


def contract(t: TensorValue, upper: int, lower: int) -> TensorValue:
    """Trace over the upper-th contravariant and the lower-th covariant slot."""
    p, q = t.valence
    if not (0 <= upper < p and 0 <= lower < q):
        raise SlotMismatch(f"slots (upper {upper}, lower {lower}) do not exist for valence {t.valence}")
    out = np.trace(t.comps, axis1=upper, axis2=p + lower)
    return TensorValue(t.dim, (p - 1, q - 1), out)


def invert_matrix(m: TensorValue) -> TensorValue:
    if m.rank != 2:
        raise SlotMismatch(f"invert_matrix needs a matrix, got valence {m.valence}")
    cond = float(np.linalg.cond(m.comps))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(cond)
    inv = np.linalg.inv(m.comps)
    p, q = m.valence
    # (0,2) -> (2,0), (1,1) -> (1,1)
    return TensorValue(m.dim, (q, p), inv)


def _check_slots(t: TensorValue, slots: Sequence[int]) -> None:
    if len(set(slots)) != len(slots):
        raise SlotMismatch("repeated slot")
    kinds = {t.is_upper(s) for s in slots}
    if len(kinds) > 1:
        raise SlotMismatch(f"slots {tuple(slots)} mix variance")


def _alternate(comps: np.ndarray, slots: Sequence[int], signed: bool) -> np.ndarray:
    k = len(slots)
    acc = np.zeros_like(comps)
    axes = list(range(comps.ndim))
    for perm in permutations(range(k)):
        order = list(axes)
        for i, j in enumerate(perm):
            order[slots[i]] = axes[slots[j]]
        sign = 1.0
        if signed:
            sign = _perm_sign(perm)
        acc = acc + sign * np.transpose(comps, order)
    return acc / factorial(k)


def _perm_sign(perm: Sequence[int]) -> float:
    perm = list(perm)
    sign = 1.0
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def symmetrize(t: TensorValue, slots: Sequence[int]) -> TensorValue:
    _check_slots(t, slots)
    return TensorValue(t.dim, t.valence, _alternate(t.comps, slots, signed=False))


def antisymmetrize(t: TensorValue, slots: Sequence[int]) -> TensorValue:
    _check_slots(t, slots)
    return TensorValue(t.dim, t.valence, _alternate(t.comps, slots, signed=True))


def lower_index(t: TensorValue, slot: int, g: np.ndarray) -> TensorValue:
    """Lower a contravariant slot with g; the new covariant slot goes first among the lower ones."""
    if not t.is_upper(slot):
        raise SlotMismatch(f"slot {slot} is not contravariant")
    p, q = t.valence
    moved = np.tensordot(np.asarray(g, dtype=float), t.comps, axes=([1], [slot]))
    moved = np.moveaxis(moved, 0, p - 1)
    return TensorValue(t.dim, (p - 1, q + 1), moved)


def raise_index(t: TensorValue, slot: int, ginv: np.ndarray) -> TensorValue:
    """Raise a covariant slot with g^-1; the new contravariant slot goes last among the upper ones."""
    if t.is_upper(slot):
        raise SlotMismatch(f"slot {slot} is not covariant")
    p, q = t.valence
    moved = np.tensordot(np.asarray(ginv, dtype=float), t.comps, axes=([1], [slot]))
    moved = np.moveaxis(moved, 0, p)
    return TensorValue(t.dim, (p + 1, q - 1), moved)


def slot_apply(t: np.ndarray, *mats: Optional[np.ndarray]) -> np.ndarray:
    """Evaluate a covariant tensor with endomorphisms inserted: t(M0 X, M1 Y, ...).

    mats[s] is a matrix M[k, i] = M^k_i or None for the identity.
    """
    out = np.asarray(t, dtype=float)
    for axis, m in enumerate(mats):
        if m is None:
            continue
        out = np.moveaxis(np.tensordot(m, out, axes=([0], [axis])), 0, axis)
    return out


def sup_norm(x) -> float:
    arr = x.comps if isinstance(x, TensorValue) else np.asarray(x, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def residual(*terms) -> float:
    """Sup norm of the sum of the terms, normalised by 1 + the sum of their sup norms."""
    arrs = [t.comps if isinstance(t, TensorValue) else np.asarray(t, dtype=float) for t in terms]
    total = arrs[0]
    for a in arrs[1:]:
        total = total + a
    scale = 1.0 + sum(sup_norm(a) for a in arrs)
    return sup_norm(total) / scale
