"""
Truncated Taylor jets with tensor values.

A Jet stores the value of a tensor-valued function at a point together with
its partial derivatives up to a fixed order (at most 3). Derivative axes are
appended after the value axes: for a value of shape S the k-th part has shape
S + (n,)*k and is symmetric in its derivative axes.

Products follow the Leibniz rule, scalar functions the Faa di Bruno formula,
so every derivative is exact up to rounding.
"""
from __future__ import annotations

from itertools import combinations
from typing import List, Sequence, Tuple, Union

import numpy as np

from utils.errors import SingularMatrixError

MAX_ORDER = 3
COND_LIMIT = 1e12

# reserved einsum letters for derivative axes
_DERIV = "UVW"

Number = Union[int, float]


def _splits(k: int):
    """All ways to hand the first k derivative letters to two factors."""
    letters = _DERIV[:k]
    for r in range(k + 1):
        for left in combinations(letters, r):
            right = "".join(c for c in letters if c not in left)
            yield "".join(left), right, letters


class Jet:
    __slots__ = ("parts", "n")

    def __init__(self, parts: Sequence[np.ndarray], n: int):
        if not parts or len(parts) > MAX_ORDER + 1:
            raise ValueError(f"jet order must be between 0 and {MAX_ORDER}")
        self.parts: Tuple[np.ndarray, ...] = tuple(np.asarray(p, dtype=float) for p in parts)
        self.n = int(n)

    # construction

    @classmethod
    def constant(cls, value, n: int, order: int) -> "Jet":
        v = np.asarray(value, dtype=float)
        parts = [v] + [np.zeros(v.shape + (n,) * k) for k in range(1, order + 1)]
        return cls(parts, n)

    @classmethod
    def coordinates(cls, point: Sequence[float], order: int) -> List["Jet"]:
        p = np.asarray(point, dtype=float)
        n = p.shape[0]
        eye = np.eye(n)
        out = []
        for i in range(n):
            parts = [np.asarray(p[i])]
            if order >= 1:
                parts.append(eye[i].copy())
            for k in range(2, order + 1):
                parts.append(np.zeros((n,) * k))
            out.append(cls(parts, n))
        return out

    @classmethod
    def stack(cls, jets: Sequence["Jet"], shape: Tuple[int, ...]) -> "Jet":
        order = min(j.order for j in jets)
        n = jets[0].n
        parts = []
        for k in range(order + 1):
            arr = np.stack([j.parts[k] for j in jets], axis=0)
            inner = arr.shape[1:]
            parts.append(arr.reshape(tuple(shape) + inner))
        return cls(parts, n)

    # basic accessors

    @property
    def order(self) -> int:
        return len(self.parts) - 1

    @property
    def value(self) -> np.ndarray:
        return self.parts[0]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.parts[0].shape

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.parts[: order + 1], self.n)

    def partial(self) -> "Jet":
        """Jet of the first partials; the derivative index becomes the last value axis."""
        if self.order < 1:
            raise ValueError("cannot differentiate a jet of order 0")
        return Jet(self.parts[1:], self.n)

    def permute(self, axes: Sequence[int]) -> "Jet":
        r = len(self.shape)
        parts = []
        for k, p in enumerate(self.parts):
            parts.append(np.transpose(p, tuple(axes) + tuple(range(r, r + k))))
        return Jet(parts, self.n)

    def __getitem__(self, idx) -> "Jet":
        return Jet([p[idx] for p in self.parts], self.n)

    # arithmetic

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.n, self.order)

    def __add__(self, other) -> "Jet":
        o = self._coerce(other)
        k = min(self.order, o.order)
        return Jet([a + b for a, b in zip(self.parts[: k + 1], o.parts[: k + 1])], self.n)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet([-p for p in self.parts], self.n)

    def __sub__(self, other) -> "Jet":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Jet":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            if c.ndim == 0:
                return Jet([p * c for p in self.parts], self.n)
            other = Jet.constant(c, self.n, self.order)
        k = min(self.order, other.order)
        parts = []
        for q in range(k + 1):
            acc = None
            for left, right, out in _splits(q):
                term = np.einsum(f"...{left},...{right}->...{out}",
                                 self.parts[len(left)], other.parts[len(right)])
                acc = term if acc is None else acc + term
            parts.append(acc)
        return Jet(parts, self.n)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / float(other))

    def __rtruediv__(self, other) -> "Jet":
        return self._coerce(other) * self.reciprocal()

    # elementwise scalar functions

    def apply(self, derivs: Sequence[np.ndarray]) -> "Jet":
        """Compose an elementwise function given f, f', f'', f''' at the value."""
        u = self.parts
        parts = [np.asarray(derivs[0], dtype=float)]
        if self.order >= 1:
            f1 = np.asarray(derivs[1], dtype=float)
            parts.append(f1[..., None] * u[1])
        if self.order >= 2:
            f2 = np.asarray(derivs[2], dtype=float)
            parts.append(
                np.einsum("...,...U,...V->...UV", f2, u[1], u[1])
                + f1[..., None, None] * u[2]
            )
        if self.order >= 3:
            f3 = np.asarray(derivs[3], dtype=float)
            parts.append(
                np.einsum("...,...U,...V,...W->...UVW", f3, u[1], u[1], u[1])
                + np.einsum("...,...UV,...W->...UVW", f2, u[2], u[1])
                + np.einsum("...,...UW,...V->...UVW", f2, u[2], u[1])
                + np.einsum("...,...VW,...U->...UVW", f2, u[2], u[1])
                + f1[..., None, None, None] * u[3]
            )
        return Jet(parts, self.n)

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.apply([s, c, -s, -c])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.apply([c, -s, -c, s])

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self.apply([e, e, e, e])

    def sqrt(self) -> "Jet":
        r = np.sqrt(self.value)
        d = [r]
        if self.order >= 1:
            d += [0.5 / r, -0.25 / r ** 3, 0.375 / r ** 5]
        return self.apply(d + [None] * (4 - len(d)))

    def reciprocal(self) -> "Jet":
        u = self.value
        d = [1.0 / u]
        if self.order >= 1:
            d += [-1.0 / u ** 2, 2.0 / u ** 3, -6.0 / u ** 4]
        return self.apply(d + [None] * (4 - len(d)))

    def powi(self, e: int) -> "Jet":
        u = self.value
        d = []
        for k in range(4):
            coeff = 1.0
            for j in range(k):
                coeff *= e - j
            if coeff == 0.0:
                d.append(np.zeros_like(u))
            else:
                d.append(coeff * u ** float(e - k))
        return self.apply(d)

    # multilinear algebra

    @staticmethod
    def einsum(subscripts: str, a, b) -> "Jet":
        """Bilinear contraction with value-axis subscripts like 'ij,jk->ik'."""
        if not isinstance(a, Jet) and not isinstance(b, Jet):
            raise TypeError("at least one operand must be a Jet")
        ref = a if isinstance(a, Jet) else b
        a = ref._coerce(a)
        b = ref._coerce(b)
        ins, out_sub = subscripts.split("->")
        sa, sb = ins.split(",")
        k = min(a.order, b.order)
        parts = []
        for q in range(k + 1):
            acc = None
            for left, right, out in _splits(q):
                term = np.einsum(f"{sa}{left},{sb}{right}->{out_sub}{out}",
                                 a.parts[len(left)], b.parts[len(right)])
                acc = term if acc is None else acc + term
            parts.append(acc)
        return Jet(parts, ref.n)

    def inv(self) -> "Jet":
        """Inverse of a square-matrix-valued jet, differentiating G X = I."""
        g0 = self.value
        if g0.ndim != 2 or g0.shape[0] != g0.shape[1]:
            raise ValueError("inverse needs a square matrix value")
        cond = float(np.linalg.cond(g0))
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise SingularMatrixError(cond)
        x0 = np.linalg.inv(g0)
        xs = [x0]
        for q in range(1, self.order + 1):
            acc = None
            for left, right, out in _splits(q):
                if not left:
                    continue
                term = np.einsum(f"ab{left},bc{right}->ac{out}",
                                 self.parts[len(left)], xs[len(right)])
                acc = term if acc is None else acc + term
            letters = _DERIV[:q]
            xs.append(-np.einsum(f"ab,bc{letters}->ac{letters}", x0, acc))
        return Jet(xs, self.n)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order}, n={self.n})"
