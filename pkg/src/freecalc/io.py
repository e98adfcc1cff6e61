"""JSON wire formats and a canonical emitter.

Formats:
  matrix   {"rows": R, "cols": C, "entries": [[re, im], ...]}   (row-major)
  tuple    {"d": D, "n": N, "mats": [matrix, ...]}
  map      {"d": D, "r": R, "components": ["expr", ...]}
  domain   {"kind": "polydisk"|"rowball"|"bdelta"|"invertibles",
            "d": D, "delta": [["expr", ...], ...]?}

:func:`dumps` emits floats with exactly 17 significant digits so reruns of
a deterministic command produce byte-identical output.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import InvalidInput
from .expr import NcMap, parse, parse_map, pretty
from .domain import DomainSpec, bdelta, invertibles, polydisk, rowball
from .linalg import MatrixTuple, as_matrix

__all__ = [
    "dumps",
    "matrix_to_json",
    "matrix_from_json",
    "tuple_to_json",
    "tuple_from_json",
    "map_to_json",
    "map_from_json",
    "domain_to_json",
    "domain_from_json",
]


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        raise InvalidInput("cannot serialize non-finite numbers")
    return f"{v:.17g}"


def _emit(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise InvalidInput("JSON object keys must be strings")
            out.append(json.dumps(k))
            out.append(":")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise InvalidInput(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Serialize to JSON with fixed 17-significant-digit float formatting."""
    out: list = []
    _emit(obj, out)
    return "".join(out)


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    rows, cols = m.shape
    flat = m.reshape(-1)
    return {
        "rows": rows,
        "cols": cols,
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed matrix JSON: {exc}") from exc
    if rows < 1 or cols < 1:
        raise InvalidInput("matrix dimensions must be positive")
    if len(entries) != rows * cols:
        raise InvalidInput(
            f"matrix JSON has {len(entries)} entries but rows*cols = {rows * cols}"
        )
    data = np.array(
        [complex(re, im) for re, im in entries], dtype=np.complex128
    ).reshape(rows, cols)
    return as_matrix(data)


def tuple_to_json(x: MatrixTuple) -> dict:
    return {"d": x.d, "n": x.n, "mats": [matrix_to_json(m) for m in x]}


def tuple_from_json(obj) -> MatrixTuple:
    try:
        d, n, mats = int(obj["d"]), int(obj["n"]), obj["mats"]
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed tuple JSON: {exc}") from exc
    if len(mats) != d:
        raise InvalidInput(f"tuple JSON declares d={d} but has {len(mats)} matrices")
    x = MatrixTuple(matrix_from_json(m) for m in mats)
    if x.n != n:
        raise InvalidInput(f"tuple JSON declares n={n} but matrices are {x.n} x {x.n}")
    return x


def map_to_json(f: NcMap) -> dict:
    return {"d": f.d, "r": f.r, "components": [pretty(c) for c in f.components]}


def map_from_json(obj) -> NcMap:
    try:
        d, r, comps = int(obj["d"]), int(obj["r"]), obj["components"]
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed map JSON: {exc}") from exc
    if len(comps) != r:
        raise InvalidInput(f"map JSON declares r={r} but has {len(comps)} components")
    return parse_map(comps, d)


def domain_to_json(spec: DomainSpec) -> dict:
    obj: dict = {"kind": spec.kind, "d": spec.d}
    if spec.delta is not None:
        obj["delta"] = [[pretty(e) for e in row] for row in spec.delta]
    return obj


def domain_from_json(obj) -> DomainSpec:
    try:
        kind = obj["kind"]
        d = int(obj["d"])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed domain JSON: {exc}") from exc
    if kind == "polydisk":
        return polydisk(d)
    if kind == "rowball":
        return rowball(d)
    if kind == "invertibles":
        return invertibles()
    if kind == "bdelta":
        rows = obj.get("delta")
        if not rows:
            raise InvalidInput("bdelta domain JSON needs a delta matrix")
        return bdelta(
            [[parse(e, d) for e in row] for row in rows], d
        )
    raise InvalidInput(f"unknown domain kind {kind!r}")
