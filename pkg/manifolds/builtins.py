"""
Builtin model spaces, produced as spec documents and loaded through load_spec.

Documents are plain JSON-ready dicts, so `generate` can dump exactly what the
engine verifies.
"""
from __future__ import annotations

import copy
import math
import re
from typing import Any, Callable, Dict, List, Optional, Sequence

from manifolds.fields import DEFAULT_BOX, ManifoldSpec, load_spec
from utils.errors import SpecSchemaError, UnknownBuiltin
from utils.expr import BinOp, Const, Expr, format_expr, parse_expr, shift_vars

TORUS_BOX = (0.0, 6.28)
S2_BOX = [[0.6, 2.5], [-0.8, 0.8]]
S6_BOX = (-0.32, 0.32)

# octonion cross-product triples on 1..7, each +1 in cyclic order
OCTONION_TRIPLES = ((1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def _zeros(n: int) -> List[List[str]]:
    return [["0"] * n for _ in range(n)]


def _identity(n: int) -> List[List[str]]:
    m = _zeros(n)
    for i in range(n):
        m[i][i] = "1"
    return m


def _box(n: int, box=DEFAULT_BOX) -> List[List[float]]:
    return [[float(box[0]), float(box[1])] for _ in range(n)]


def _check_even(name: str, n: int) -> None:
    if n < 2 or n % 2:
        raise SpecSchemaError(f"{name} needs an even dimension >= 2, got {n}")


def _standard_F(n: int) -> List[List[str]]:
    F = _zeros(n)
    for i in range(0, n, 2):
        F[i][i + 1] = "1"
        F[i + 1][i] = "-1"
    return F


# base builders

def flat_kahler(dim: int = 4) -> Dict[str, Any]:
    _check_even("flat_kahler", dim)
    return {
        "name": "flat_kahler",
        "dim": dim,
        "backend": "chart",
        "domain": _box(dim),
        "fields": {"g": _identity(dim), "F": _standard_F(dim)},
    }


def flat_torus_kahler(dim: int = 2) -> Dict[str, Any]:
    _check_even("flat_torus_kahler", dim)
    doc = flat_kahler(dim)
    doc["name"] = "flat_torus_kahler"
    doc["domain"] = _box(dim, TORUS_BOX)
    return doc


def round_s2(radius: float = 1.0) -> Dict[str, Any]:
    if radius <= 0:
        raise SpecSchemaError(f"round_s2 needs a positive radius, got {radius}")
    r2 = format_expr(Const(float(radius) ** 2))
    return {
        "name": "round_s2",
        "dim": 2,
        "backend": "chart",
        "domain": copy.deepcopy(S2_BOX),
        "fields": {
            "g": [[r2, "0"], ["0", f"{r2} * sin(x0)^2"]],
            "F": [["0", f"{r2} * sin(x0)"], [f"-{r2} * sin(x0)", "0"]],
        },
    }


def s6_nearly_kahler() -> Dict[str, Any]:
    n, m = 6, 7
    cross = [[[] for _ in range(m)] for _ in range(m)]
    for a, b, c in OCTONION_TRIPLES:
        # (p x X)_k = eps_ijk p_i X_j over the cyclic and anticyclic orders
        for i, j, k, s in ((a, b, c, 1), (b, c, a, 1), (c, a, b, 1),
                           (b, a, c, -1), (c, b, a, -1), (a, c, b, -1)):
            cross[k - 1][j - 1].append(("+" if s > 0 else "-", i - 1))
    A_amb = []
    for k in range(m):
        row = []
        for j in range(m):
            terms = cross[k][j]
            if not terms:
                row.append("0")
                continue
            text = " ".join(f"{sgn} x{i}" for sgn, i in terms)
            row.append(text[2:] if text.startswith("+ ") else "-" + text[2:])
        A_amb.append(row)
    radicand = " - ".join(["1"] + [f"x{i}^2" for i in range(n)])
    return {
        "name": "s6_nearly_kahler",
        "dim": n,
        "backend": "embedded",
        "domain": _box(n, S6_BOX),
        "fields": {},
        "embedding": {
            "ambient_dim": m,
            "map": [f"x{i}" for i in range(n)] + [f"sqrt({radicand})"],
            "A_ambient": A_amb,
        },
    }


def control_noncriterion() -> Dict[str, Any]:
    F = _standard_F(4)
    F[0][1], F[1][0] = "x2", "-x2"
    return {
        "name": "control_noncriterion",
        "dim": 4,
        "backend": "chart",
        "domain": _box(4),
        "fields": {"g": _identity(4), "F": F},
    }


def eigen_drift() -> Dict[str, Any]:
    F = _standard_F(4)
    F[0][1], F[1][0] = "sqrt(1 + x0^2)", "-sqrt(1 + x0^2)"
    Q = _identity(4)
    Q[0][0] = Q[1][1] = "1 + x0^2"
    return {
        "name": "eigen_drift",
        "dim": 4,
        "backend": "chart",
        "domain": _box(4),
        "fields": {"g": _identity(4), "F": F, "Q": Q},
    }


# product builders

def _parse_grid(rows, dim: int) -> List[List[Expr]]:
    return [[parse_expr(str(c), dim) for c in row] for row in rows]


def _scaled(e: Expr, c: float) -> Expr:
    if c == 1.0:
        return e
    if isinstance(e, Const):
        return Const(c * e.value)
    return BinOp("*", Const(c), e)


def _block(blocks: Sequence[List[List[str]]]) -> List[List[str]]:
    total = sum(len(b) for b in blocks)
    out = _zeros(total)
    off = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, cell in enumerate(row):
                out[off + i][off + j] = cell
        off += len(b)
    return out


def _shift_grid(rows, dim: int, offset: int, scale: float = 1.0) -> List[List[str]]:
    grid = _parse_grid(rows, dim)
    return [[format_expr(_scaled(shift_vars(e, offset), scale)) for e in row] for row in grid]


def _metric_parts(doc: Dict[str, Any]):
    """(g, F, A) as expression grids; F or A may be None."""
    n = doc["dim"]
    fields = doc.get("fields", {})
    if "G" in fields:
        G = _parse_grid(fields["G"], n)
        g = [[BinOp("*", Const(0.5), BinOp("+", G[i][j], G[j][i])) if i != j else G[i][i]
              for j in range(n)] for i in range(n)]
        F = [[BinOp("*", Const(0.5), BinOp("-", G[i][j], G[j][i])) if i != j else Const(0.0)
              for j in range(n)] for i in range(n)]
        return g, F, None
    g = _parse_grid(fields["g"], n)
    F = _parse_grid(fields["F"], n) if "F" in fields else None
    A = _parse_grid(fields["A"], n) if "A" in fields else None
    return g, F, A


def _require_plain(doc: Dict[str, Any], builder: str) -> None:
    fields = doc.get("fields", {})
    if "xi" in fields or "eta" in fields:
        raise SpecSchemaError(f"{builder} does not accept contact factors ('{doc.get('name')}' carries xi/eta)")


def weighted_product(factors: Sequence[Dict[str, Any]], weights: Sequence[float]) -> Dict[str, Any]:
    if len(factors) != len(weights) or not factors:
        raise SpecSchemaError(f"weighted_product needs one weight per factor, got {len(factors)} factors "
                              f"and {len(weights)} weights")
    for w in weights:
        if not w > 0:
            raise SpecSchemaError(f"weighted_product weights must be positive, got {w}")
    backends = {f.get("backend", "chart") for f in factors}
    if len(backends) != 1:
        raise SpecSchemaError("weighted_product factors must all use the same backend")
    for f in factors:
        _require_plain(f, "weighted_product")

    backend = backends.pop()
    dim = sum(f["dim"] for f in factors)
    domain: List[List[float]] = []
    Q_blocks, g_blocks, F_blocks, A_blocks = [], [], [], []
    amb_maps: List[str] = []
    amb_blocks: List[List[List[str]]] = []
    off = amb_off = 0
    has_A = has_F = False
    for f, w in zip(factors, weights):
        n = f["dim"]
        s = math.sqrt(float(w))
        domain.extend(copy.deepcopy(f.get("domain") or _box(n)))
        fq = f.get("fields", {}).get("Q")
        if fq is not None:
            Q_blocks.append(_shift_grid(fq, n, off, float(w)))
        else:
            Q_blocks.append([[format_expr(Const(float(w))) if i == j else "0" for j in range(n)] for i in range(n)])
        if backend == "chart":
            g, F, A = _metric_parts(f)
            if F is None and A is None:
                raise SpecSchemaError(f"weighted_product factor '{f.get('name')}' carries no A")
            g_blocks.append([[format_expr(shift_vars(e, off)) for e in row] for row in g])
            F_blocks.append(None if F is None else
                            [[format_expr(_scaled(shift_vars(e, off), s)) for e in row] for row in F])
            A_blocks.append(None if A is None else
                            [[format_expr(_scaled(shift_vars(e, off), s)) for e in row] for row in A])
            has_F |= F is not None
            has_A |= A is not None
        else:
            emb = f["embedding"]
            m = emb["ambient_dim"]
            amb_maps.extend(format_expr(shift_vars(e, off)) for e in (parse_expr(str(c), n) for c in emb["map"]))
            amb_blocks.append(_shift_grid(emb["A_ambient"], m, amb_off, s))
            amb_off += m
        off += n

    doc: Dict[str, Any] = {
        "name": "weighted_product",
        "dim": dim,
        "backend": backend,
        "domain": domain,
        "fields": {"Q": _block(Q_blocks)},
    }
    if backend == "chart":
        doc["fields"]["g"] = _block(g_blocks)
        if has_F and all(b is not None for b in F_blocks):
            doc["fields"]["F"] = _block(F_blocks)
        elif has_A and all(b is not None for b in A_blocks):
            doc["fields"]["A"] = _block(A_blocks)
        else:
            raise SpecSchemaError("weighted_product factors must all give F, or all give A")
    else:
        doc["embedding"] = {"ambient_dim": amb_off, "map": amb_maps, "A_ambient": _block(amb_blocks)}
    return doc


def line_product(factor: Dict[str, Any]) -> Dict[str, Any]:
    """R x M with t = x0, xi = d/dt, eta = dt and A extended by A xi = 0."""
    _require_plain(factor, "line_product")
    n = factor["dim"]
    dim = n + 1
    fields = factor.get("fields", {})
    out_fields: Dict[str, Any] = {}

    def lift(rows, corner: str) -> List[List[str]]:
        return _block([[[corner]], _shift_grid(rows, n, 1)])

    if "Q" in fields:
        out_fields["Q"] = lift(fields["Q"], "1")
    doc: Dict[str, Any] = {
        "name": f"line_product_{factor.get('name', 'spec')}",
        "dim": dim,
        "backend": factor.get("backend", "chart"),
        "domain": [list(DEFAULT_BOX)] + copy.deepcopy(factor.get("domain") or _box(n)),
    }
    if doc["backend"] == "chart":
        if "G" in fields:
            out_fields["G"] = lift(fields["G"], "1")
        else:
            out_fields["g"] = lift(fields["g"], "1")
            for name in ("F", "A"):
                if name in fields:
                    out_fields[name] = lift(fields[name], "0")
    else:
        emb = factor["embedding"]
        m = emb["ambient_dim"]
        doc["embedding"] = {
            "ambient_dim": m + 1,
            "map": ["x0"] + [format_expr(shift_vars(parse_expr(str(c), n), 1)) for c in emb["map"]],
            "A_ambient": _block([[["0"]], _shift_grid(emb["A_ambient"], m, 1)]),
        }
    e0 = ["1"] + ["0"] * n
    out_fields["xi"] = list(e0)
    out_fields["eta"] = list(e0)
    doc["fields"] = out_fields
    return doc


# registry

FACTOR_TOKEN = re.compile(r"^(?P<kind>[tk])(?P<dim>\d+)$|^(?P<named>s2|s6)$")


def factor_document(token: str) -> Dict[str, Any]:
    """CLI factor tokens: t<n> flat torus, k<n> flat Kahler, s2 unit sphere, s6 nearly Kahler sphere."""
    tok = token.strip().lower()
    m = FACTOR_TOKEN.match(tok)
    if not m:
        if tok in BUILTINS:
            return builtin_document(tok, {})
        raise UnknownBuiltin(f"unknown factor token '{token}' (use t<n>, k<n>, s2, s6 or a builtin name)")
    if m.group("named") == "s2":
        return round_s2(1.0)
    if m.group("named") == "s6":
        return s6_nearly_kahler()
    n = int(m.group("dim"))
    return flat_torus_kahler(n) if m.group("kind") == "t" else flat_kahler(n)


def _as_document(f: Any) -> Dict[str, Any]:
    if isinstance(f, ManifoldSpec):
        return copy.deepcopy(f.document)
    if isinstance(f, dict):
        return f
    return factor_document(str(f))


def _weighted(params: Dict[str, Any]) -> Dict[str, Any]:
    factors = [_as_document(f) for f in params.get("factors") or ["t2", "t2"]]
    weights = [float(w) for w in params.get("weights") or [1.0] * len(factors)]
    return weighted_product(factors, weights)


def _line(params: Dict[str, Any]) -> Dict[str, Any]:
    base = params.get("spec") or params.get("factor") or "s6"
    return line_product(_as_document(base))


BUILTINS: Dict[str, Callable[[Dict[str, Any]], Dict[str, Any]]] = {
    "flat_kahler": lambda p: flat_kahler(int(p.get("dim") or 4)),
    "flat_torus_kahler": lambda p: flat_torus_kahler(int(p.get("dim") or 2)),
    "round_s2": lambda p: round_s2(float(p.get("radius") or 1.0)),
    "s6_nearly_kahler": lambda p: s6_nearly_kahler(),
    "weighted_product": _weighted,
    "line_product": _line,
    "control_noncriterion": lambda p: control_noncriterion(),
    "eigen_drift": lambda p: eigen_drift(),
}

ALIASES = {"s6": "s6_nearly_kahler", "s2": "round_s2"}


def builtin_document(name: str, params: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    key = ALIASES.get(name, name)
    builder = BUILTINS.get(key)
    if builder is None:
        raise UnknownBuiltin(f"unknown builtin '{name}' (known: {', '.join(sorted(BUILTINS))})")
    return builder(dict(params or {}))


def builtin(name: str, params: Optional[Dict[str, Any]] = None) -> ManifoldSpec:
    return load_spec(builtin_document(name, params))
