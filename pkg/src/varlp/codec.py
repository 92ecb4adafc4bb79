"""JSON encodings for every value type that crosses the CLI boundary."""

from __future__ import annotations

import json
import math
from typing import Any

from .operators import (
    ColumnReport,
    IsometryCheck,
    IsomodularCertificate,
    LampertiOperator,
    MatrixOperator,
    Permutation,
    Shift,
    Table,
    ThetaDecision,
)
from .setiso import RegularSetIso
from .space import Constant, ExponentSequence, NormResult, Periodic, SparseSequence


class DecodeError(ValueError):
    pass


def _require(obj, key, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise DecodeError(f"missing field {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise DecodeError(f"field {key!r} must be {kind}")
    return val


def _num(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise DecodeError(f"expected a number, got {x!r}")
    return float(x)


def _int(x) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise DecodeError(f"expected an integer, got {x!r}")
    return x


def _real(x: float) -> float | None:
    return x if math.isfinite(x) else None


# -- exponents and sequences --


def encode_exponents(p: ExponentSequence) -> dict:
    if isinstance(p.tail, Constant):
        tail = {"kind": "constant", "value": p.tail.value}
    else:
        tail = {"kind": "periodic", "pattern": list(p.tail.pattern)}
    return {"prefix": list(p.prefix), "tail": tail}


def decode_exponents(obj: Any) -> ExponentSequence:
    prefix = [_num(v) for v in obj.get("prefix", [])] if isinstance(obj, dict) else None
    if prefix is None:
        raise DecodeError("exponent sequence must be an object")
    tail = _require(obj, "tail", dict)
    kind = tail.get("kind")
    if kind == "constant":
        t = Constant(_num(_require(tail, "value")))
    elif kind == "periodic":
        t = Periodic(tuple(_num(v) for v in _require(tail, "pattern", list)))
    else:
        raise DecodeError(f"unknown tail kind {kind!r}")
    return ExponentSequence(tuple(prefix), t)


def _encode_entries(a: SparseSequence) -> list:
    return [[n, v.real, v.imag] for n, v in a.items()]


def _decode_entries(rows) -> SparseSequence:
    if not isinstance(rows, list):
        raise DecodeError("entries must be a list of [index, re, im]")
    out = {}
    last = 0
    for row in rows:
        if not isinstance(row, list) or len(row) not in (2, 3):
            raise DecodeError(f"bad entry {row!r}")
        n = _int(row[0])
        if n <= last:
            raise DecodeError("entry indices must be strictly ascending")
        last = n
        z = complex(_num(row[1]), _num(row[2]) if len(row) == 3 else 0.0)
        if z == 0:
            raise DecodeError(f"explicit zero entry at index {n}")
        out[n] = z
    return SparseSequence(out)


def encode_sequence(a: SparseSequence) -> dict:
    return {"entries": _encode_entries(a)}


def decode_sequence(obj: Any) -> SparseSequence:
    return _decode_entries(_require(obj, "entries"))


def encode_norm(r: NormResult) -> dict:
    return {"norm": r.value, "residual": r.residual, "iterations": r.iterations}


# -- set isomorphisms and operators --


def encode_set_iso(T: RegularSetIso) -> dict:
    return {"images": [[k, sorted(s)] for k, s in enumerate(T.images, start=1)]}


def decode_set_iso(obj: Any) -> RegularSetIso:
    rows = _require(obj, "images", list)
    images = []
    for expected, row in enumerate(rows, start=1):
        if not isinstance(row, list) or len(row) != 2 or _int(row[0]) != expected:
            raise DecodeError("images must list [k, [...]] for k = 1, 2, ... in order")
        images.append([_int(n) for n in row[1]])
    return RegularSetIso(images)


def encode_rule(theta) -> dict:
    if isinstance(theta, Shift):
        return {"type": "shift", "offset": theta.offset}
    kind = "permutation" if isinstance(theta, Permutation) else "table"
    return {"type": kind, "table": [list(kv) for kv in theta.table]}


def decode_rule(obj: Any):
    kind = _require(obj, "type")
    if kind == "shift":
        return Shift(_int(_require(obj, "offset")))
    if kind in ("permutation", "table"):
        pairs = [(_int(a), _int(b)) for a, b in _require(obj, "table", list)]
        return Permutation(pairs) if kind == "permutation" else Table(pairs)
    raise DecodeError(f"unknown injection type {kind!r}")


def encode_operator(op) -> dict:
    if isinstance(op, LampertiOperator):
        return {"kind": "lamperti", "h": _encode_entries(op.multiplier), "iso": encode_set_iso(op.set_iso)}
    if isinstance(op, MatrixOperator):
        return {
            "kind": "matrix",
            "n": op.dimension,
            "columns": [[k, _encode_entries(col)] for k, col in op.columns.items()],
        }
    if isinstance(op, (Shift, Permutation, Table)):
        return {"kind": "injection", "rule": encode_rule(op)}
    raise TypeError(f"cannot encode {type(op).__name__}")


def decode_operator(obj: Any):
    kind = _require(obj, "kind")
    if kind == "lamperti":
        return LampertiOperator(_decode_entries(_require(obj, "h")), decode_set_iso(_require(obj, "iso")))
    if kind == "injection":
        return decode_rule(_require(obj, "rule"))
    if kind == "matrix":
        cols = {}
        for row in _require(obj, "columns", list):
            if not isinstance(row, list) or len(row) != 2:
                raise DecodeError("matrix columns must be [k, entries]")
            cols[_int(row[0])] = _decode_entries(row[1])
        return MatrixOperator(_int(_require(obj, "n")), cols)
    raise DecodeError(f"unknown operator kind {kind!r}")


# -- results --


def encode_column_report(r: ColumnReport) -> dict:
    return {
        "k": r.k,
        "support": list(r.support),
        "exponent_match": r.exponent_match,
        "column_modular": _real(r.column_modular),
        "overlaps": list(r.overlaps),
    }


def encode_certificate(c: IsomodularCertificate) -> dict:
    out = {
        "verdict": c.verdict.value,
        "witness": encode_sequence(c.witness) if c.witness is not None else None,
        "detail": [encode_column_report(r) for r in c.detail],
    }
    if c.witness_modulars is not None:
        out["witness_modular"], out["image_modular"] = c.witness_modulars
    return out


def encode_isometry(r: IsometryCheck) -> dict:
    return {
        "verdict": r.verdict,
        "probes": r.probes,
        "witness": encode_sequence(r.witness) if r.witness is not None else None,
        "norm_x": r.norm_x,
        "norm_image": r.norm_image,
    }


def encode_theta_decision(d: ThetaDecision) -> dict:
    return {
        "verdict": d.verdict,
        "index": d.index,
        "witness": encode_sequence(d.witness) if d.witness is not None else None,
        "witness_norm": d.witness_norm,
        "image_norm": d.image_norm,
    }


def dumps(obj: Any) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(obj, sort_keys=True, allow_nan=False, separators=(",", ":"))
