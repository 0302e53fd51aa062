import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

import numpy as np

from agents.decision import DEFAULT_TOL, worst_verdict
from geometry.pointwise import PointGeometry
from geometry.spectral import aq_basis, involutivity_summary, spectral_split
from manifolds.builtins import BUILTINS, ALIASES, builtin_document
from manifolds.fields import ManifoldSpec, load_spec, make_provider
from utils.errors import GeometryError, NonConstantSpectrum, PointOutsideDomain
from utils.sampling import DEFAULT_POINTS, DEFAULT_SEED, sample_points
from utils.spec_io import dump_document, load_document, write_output
from workflow.langgraph_workflow import run_suite_state

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2

ZERO_PRINT_TOL = 1e-14


def _info(msg: str) -> None:
    print(f"[INFO] {msg}", file=sys.stderr)


def _warn(msg: str) -> None:
    print(f"[WARN] {msg}", file=sys.stderr)


def _error(msg: str) -> None:
    print(f"[ERROR] {msg}", file=sys.stderr)


def _csv(text: Optional[str]) -> Optional[List[str]]:
    if not text:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


def _params(args) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    if getattr(args, "dim", None) is not None:
        params["dim"] = args.dim
    if getattr(args, "radius", None) is not None:
        params["radius"] = args.radius
    if getattr(args, "factors", None):
        params["factors"] = _csv(args.factors)
    if getattr(args, "weights", None):
        params["weights"] = [float(w) for w in _csv(args.weights)]
    if getattr(args, "factor", None):
        params["factor"] = args.factor
    return params


def _document(args) -> Dict[str, Any]:
    if args.spec:
        return load_document(args.spec)
    return builtin_document(args.builtin, _params(args))


def _spec(args) -> ManifoldSpec:
    return load_spec(_document(args))


def _point(spec: ManifoldSpec, text: Optional[str]) -> np.ndarray:
    if text:
        p = np.array([float(v) for v in _csv(text)], dtype=float)
    else:
        p = np.array([0.5 * (lo + hi) for lo, hi in spec.domain])
    if not spec.contains(p):
        raise PointOutsideDomain(f"point {tuple(p.tolist())} is outside the domain of '{spec.name}'")
    return p


def _fmt_point(p: Sequence[float]) -> str:
    return "(" + ", ".join(f"{v:g}" for v in p) + ")"


def _table(title: str, arr: np.ndarray) -> List[str]:
    lines = [title]
    nonzero = False
    for idx in np.ndindex(*arr.shape):
        v = float(arr[idx])
        if abs(v) > ZERO_PRINT_TOL:
            nonzero = True
            lines.append(f"  ({','.join(str(i) for i in idx)})  {v:+.6e}")
    if not nonzero:
        lines.append("  all zero")
    return lines


# subcommands

def cmd_generate(args) -> int:
    doc = builtin_document(args.builtin, _params(args))
    load_spec(doc)
    write_output(dump_document(doc), args.out)
    _info(f"generated spec '{doc.get('name')}'")
    return EXIT_PASS


def cmd_builtins(args) -> int:
    names = sorted(BUILTINS)
    aliases = [f"{a} -> {t}" for a, t in sorted(ALIASES.items())]
    write_output("\n".join(names + aliases), args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    document = _document(args)
    state = run_suite_state(document=document, suite=args.suite, points=args.points,
                            seed=args.seed, tol=args.tol)
    for line in state["execution_log"]:
        _info(line)
    for err in state["errors"]:
        _warn(err)
    if state.get("fatal") is not None:
        _error(str(state["fatal"]))
        return EXIT_ERROR

    report = state["report"]
    if args.format == "json":
        write_output(json.dumps(report, indent=2), args.out)
    else:
        lines = [f"spec: {report['spec']['name']}  hash: {report['spec']['hash']}  suite: {report['suite']}  "
                 f"points: {report['points']}  seed: {report['seed']}  tol: {report['tol']:g}"]
        for r in report["results"]:
            mx = "-" if r["max_residual"] is None else f"{r['max_residual']:.3e}"
            extra = f"  ({r['reason']})" if r.get("reason") else ""
            lines.append(f"  {r['verdict']:<4}  {r['id']:<18} {mx:>10}  {r['formula']}{extra}")
        write_output("\n".join(lines), args.out)
    return EXIT_FAIL if worst_verdict(report) == "fail" else EXIT_PASS


def cmd_connection(args) -> int:
    spec = _spec(args)
    p = _point(spec, args.point)
    geo = PointGeometry(make_provider(spec), p)
    tables = [
        ("Gamma_g", "Levi-Civita coefficients Gamma^k_ij  (k,i,j)", geo.gam_g),
        ("Gamma", "Einstein connection coefficients Gamma^k_ij  (k,i,j)", geo.gam),
        ("T", "torsion T_ijk", geo.T),
        ("K", "contorsion K_ijk", geo.K),
        ("dF", "exterior derivative dF_ijk", geo.dF),
    ]
    if args.format == "json":
        payload = {"spec": spec.name, "point": p.tolist()}
        payload.update({key: arr.tolist() for key, _, arr in tables})
        write_output(json.dumps(payload, indent=2), args.out)
    else:
        lines = [f"spec: {spec.name}  point: {_fmt_point(p)}"]
        for key, title, arr in tables:
            lines.extend(_table(f"[{key}] {title}", arr))
        write_output("\n".join(lines), args.out)
    return EXIT_PASS


def cmd_basis(args) -> int:
    spec = _spec(args)
    p = _point(spec, args.point)
    provider = make_provider(spec)
    basis = aq_basis(provider, p)
    b = provider.bundle(p, 0)
    res = basis.residuals(b["g"].value, b["A"].value, b["Q"].value)
    if args.format == "json":
        payload = {"spec": spec.name, "point": p.tolist(), "eigenvalues": list(basis.eigenvalues),
                   "kernel_dim": basis.kernel_dim, "vectors": basis.vectors.T.tolist(), "residuals": res}
        write_output(json.dumps(payload, indent=2), args.out)
    else:
        lines = [f"spec: {spec.name}  point: {_fmt_point(p)}  kernel: {basis.kernel_dim}"]
        for value, mult in basis.spectrum:
            lines.append(f"  eigenvalue {value:.6g}  multiplicity {mult}")
        for k in range(basis.vectors.shape[1]):
            comps = " ".join(f"{v:+.6f}" for v in basis.vectors[:, k])
            lines.append(f"  e{k}  lambda={basis.eigenvalues[k]:.6g}  [{comps}]")
        lines.extend(f"  {key}: {val:.3e}" for key, val in res.items())
        write_output("\n".join(lines), args.out)
    return EXIT_PASS


def cmd_split(args) -> int:
    spec = _spec(args)
    provider = make_provider(spec)
    pts = sample_points(spec.domain, args.points, args.seed)
    try:
        split = spectral_split(provider, pts)
    except NonConstantSpectrum as e:
        _error(str(e))
        return EXIT_FAIL

    worst = involutivity_summary(split, provider, pts)
    failed = any(max(w.values()) > args.tol for w in worst.values())

    if args.format == "json":
        payload = {"spec": spec.name, "points": len(pts), "seed": args.seed,
                   "eigenvalues": list(split.eigenvalues), "multiplicities": list(split.multiplicities),
                   "involutivity": [{"eigenvalue": v, **w} for v, w in worst.items()]}
        write_output(json.dumps(payload, indent=2), args.out)
    else:
        lines = [f"spec: {spec.name}  points: {len(pts)}  seed: {args.seed}  k: {split.k}"]
        for (v, m) in zip(split.eigenvalues, split.multiplicities):
            w = worst[v]
            lines.append(f"  eigenvalue {v:.6g}  multiplicity {m}  "
                         f"bracket {w['bracket']:.3e}  geodesic {w['geodesic']:.3e}")
        write_output("\n".join(lines), args.out)
    return EXIT_FAIL if failed else EXIT_PASS


# argument parsing

def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--spec", help="spec document (JSON); bare names are looked up in specs/")
    src.add_argument("--builtin", help="builtin spec name")
    p.add_argument("--dim", type=int, help="dimension for flat builtins")
    p.add_argument("--radius", type=float, help="radius for round_s2")
    p.add_argument("--factors", help="weighted_product factors, e.g. t2,t2 or k4,s6")
    p.add_argument("--weights", help="weighted_product weights, e.g. 1,4")
    p.add_argument("--factor", help="line_product factor, e.g. s6")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--verbose", action="store_true", help="debug logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gr-verify",
                                     description="Verify identities of generalized Riemannian manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a builtin spec document")
    p.add_argument("--builtin", required=True)
    p.add_argument("--dim", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--factors")
    p.add_argument("--weights")
    p.add_argument("--factor")
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", help="run an identity suite")
    _add_source(p)
    _add_common(p)
    p.add_argument("--suite", default="all",
                   choices=("emc", "hermitian", "acm", "para", "splitting", "all"))
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("connection", help="connection coefficient tables at a point")
    _add_source(p)
    _add_common(p)
    p.add_argument("--point", help="comma separated chart coordinates (default: domain centre)")
    p.set_defaults(func=cmd_connection)

    p = sub.add_parser("basis", help="A-Q basis at a point")
    _add_source(p)
    _add_common(p)
    p.add_argument("--point")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("split", help="spectral split of Q over sample points")
    _add_source(p)
    _add_common(p)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("builtins", help="list builtin specs")
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_builtins)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_PASS

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GeometryError, RuntimeError, OSError) as e:
        _error(str(e))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
