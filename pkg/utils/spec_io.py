import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, Optional

BASE_DIR = Path(__file__).resolve().parent.parent
SPECS_DIR = BASE_DIR / "specs"


def _safe_float(x: Any, default: Optional[float] = None) -> Optional[float]:
    if x is None:
        return default
    try:
        return float(x)
    except Exception:
        return default


def load_document(path: str) -> Dict[str, Any]:
    """
    Read a spec document from disk. Relative names that do not exist are looked up in specs/.
    """
    p = Path(path)
    if not p.exists() and not p.is_absolute():
        alt = SPECS_DIR / p
        if not alt.suffix:
            alt = alt.with_suffix(".json")
        if alt.exists():
            p = alt
    if not p.exists():
        raise RuntimeError(f"Spec file not found: {path}")
    try:
        with open(p, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise RuntimeError(f"Spec file is not valid JSON: {path} ({e})") from e
    if isinstance(doc, dict):
        doc.setdefault("name", p.stem)
    return doc


def dump_document(doc: Dict[str, Any]) -> str:
    # canonical form: byte-for-byte reproducible
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def spec_hash(doc: Dict[str, Any]) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def write_output(text: str, out: Optional[str] = None) -> None:
    if not out or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    p = Path(out)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as f:
        f.write(text)
