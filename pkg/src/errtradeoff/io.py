"""JSON input parsing and CSV/JSON output with round-trippable floats.

Complex numbers are written as ``[re, im]``; plain numbers are accepted as
real entries on input.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .errors import ParseError, TradeoffError, ValidationError
from .qcore import Observable, QuantumState, make_state, validate_observable
from .scheme import JointScheme, build_scheme


def fmt_float(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return format(x, ".17g")


def _entry(v, where: str) -> complex:
    if isinstance(v, bool):
        raise ValidationError(f"{where}: boolean is not a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise ValidationError(f"{where}: expected a number or [re, im], got {v!r}")


def parse_vector(raw, where: str = "vector") -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ValidationError(f"{where}: expected a non-empty list")
    return np.array([_entry(v, f"{where}[{i}]") for i, v in enumerate(raw)], dtype=complex)


def parse_matrix(raw, where: str = "matrix") -> np.ndarray:
    if isinstance(raw, dict):
        if "matrix" not in raw:
            raise ValidationError(f"{where}: object needs a 'matrix' key")
        m = parse_matrix(raw["matrix"], where)
        if "dim" in raw and raw["dim"] != m.shape[0]:
            raise ValidationError(f"{where}: dim {raw['dim']} does not match matrix size {m.shape[0]}")
        return m
    if not isinstance(raw, list) or not raw or not all(isinstance(row, list) for row in raw):
        raise ValidationError(f"{where}: expected a list of rows")
    n = len(raw[0])
    if any(len(row) != n for row in raw):
        raise ValidationError(f"{where}: ragged rows")
    return np.array([[_entry(v, f"{where}[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(raw)], dtype=complex)


def parse_observable(raw, where: str = "observable") -> Observable:
    return validate_observable(parse_matrix(raw, where))


def parse_state(raw, where: str = "state") -> QuantumState:
    if not isinstance(raw, dict) or len({"pure", "density"} & set(raw)) != 1:
        raise ValidationError(f"{where}: expected an object with exactly one of 'pure' or 'density'")
    if "pure" in raw:
        return make_state(parse_vector(raw["pure"], f"{where}.pure"))
    return make_state(parse_matrix(raw["density"], f"{where}.density"))


def parse_scheme(raw, where: str = "scheme") -> JointScheme:
    if not isinstance(raw, dict) or "estA" not in raw or "estB" not in raw:
        raise ValidationError(f"{where}: expected an object with 'estA' and 'estB'")
    anc = raw.get("ancilla")
    ancilla = None if anc is None else make_state(parse_vector(anc, f"{where}.ancilla"))
    return build_scheme(parse_matrix(raw["estA"], f"{where}.estA"), parse_matrix(raw["estB"], f"{where}.estB"), ancilla)


def load_json(path) -> Any:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"{p}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def load_problem(path) -> dict:
    """Read a problem file with keys A, B, state and optionally scheme/targets."""
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    out: dict = {}
    try:
        for key in ("A", "B", "state"):
            if key not in doc:
                raise ValidationError(f"missing key '{key}'")
        out["A"] = parse_observable(doc["A"], "A")
        out["B"] = parse_observable(doc["B"], "B")
        out["state"] = parse_state(doc["state"])
        if "scheme" in doc:
            out["scheme"] = parse_scheme(doc["scheme"])
        if "decomposition" in doc:
            dec = doc["decomposition"]
            out["decomposition"] = (
                [float(w) for w in dec["weights"]],
                [parse_vector(c, f"decomposition.components[{i}]") for i, c in enumerate(dec["components"])],
            )
        out["targets"] = {k: float(v) for k, v in doc.get("targets", {}).items()}
    except TradeoffError as exc:
        exc.args = (f"{path}: {exc}",)
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_Float(obj.real), _Float(obj.imag)]
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


class _Float(float):
    pass


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""

    def enc(o):
        if isinstance(o, _Float):
            return fmt_float(o)
        if isinstance(o, dict):
            return "{" + ", ".join(f"{json.dumps(k)}: {enc(v)}" for k, v in o.items()) + "}"
        if isinstance(o, list):
            return "[" + ", ".join(enc(v) for v in o) + "]"
        return json.dumps(o)

    return enc(_jsonable(obj)) + "\n"


def write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
