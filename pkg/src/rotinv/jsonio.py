"""Canonical JSON helpers: deterministic bytes, schema validation plumbing."""

from __future__ import annotations

import json

import numpy as np
import scipy.sparse as sp

from .errors import SchemaError

SCHEMA_VERSION = 1


def canonical_dumps(obj) -> str:
    """Deterministic serialization: sorted keys, fixed separators, LF endings."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def dump_json(obj, path):
    with open(path, "w") as fh:
        fh.write(canonical_dumps(obj))


def require_keys(doc: dict, keys, where: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected an object, got {type(doc).__name__}")
    for key in keys:
        if key not in doc:
            raise SchemaError(f"{where}: missing key {key!r}")


def matrix_to_json(mat) -> list:
    """Dense matrix as row-major [re, im] pairs."""
    arr = np.asarray(mat.toarray() if sp.issparse(mat) else mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def matrix_from_json(obj, where: str = "matrix") -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(f"{where}: expected a non-empty list of rows")
    n = len(obj)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{where}: row {i} is not a list of length {n}")
        for k, pair in enumerate(row):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{where}: entry ({i},{k}) is not an [re, im] pair")
            out[i, k] = complex(pair[0], pair[1])
    return out


def sparse_matrix_to_json(mat) -> dict:
    """COO triplet form for matrices too large to list densely."""
    coo = sp.coo_matrix(mat)
    order = np.lexsort((coo.col, coo.row))
    entries = [
        [int(coo.row[i]), int(coo.col[i]), float(coo.data[i].real), float(np.imag(coo.data[i]))]
        for i in order
    ]
    return {"format": "coo", "dim": int(coo.shape[0]), "entries": entries}


def sparse_matrix_from_json(obj, where: str = "matrix") -> sp.csr_matrix:
    require_keys(obj, ("format", "dim", "entries"), where)
    if obj["format"] != "coo":
        raise SchemaError(f"{where}: unknown sparse format {obj['format']!r}")
    dim = int(obj["dim"])
    rows, cols, vals = [], [], []
    for k, ent in enumerate(obj["entries"]):
        if not isinstance(ent, list) or len(ent) != 4:
            raise SchemaError(f"{where}: entry {k} is not [row, col, re, im]")
        rows.append(int(ent[0]))
        cols.append(int(ent[1]))
        vals.append(complex(ent[2], ent[3]))
    vals = np.asarray(vals)
    if vals.size and np.max(np.abs(vals.imag)) == 0.0:
        vals = vals.real
    return sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
