"""Symbol documents: a JSON text format with exact float round-trip.

A document carries the variable count, the fiber dimensions and a list of
terms; each term has an integer exponent vector "k" of length n and a
row-major matrix of [re, im] pairs.  Python's JSON encoder emits the shortest
representation that round-trips an IEEE double, so write followed by read
reproduces every coefficient bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .symbol import LaurentSymbol, _index_sort_key

FORMAT_NAME = "laurent-symbol"
FORMAT_VERSION = 1


def symbol_to_json(phi: LaurentSymbol) -> str:
    terms = []
    for k in sorted(phi.terms, key=_index_sort_key):
        mat = phi.terms[k]
        rows = [[[float(v.real), float(v.imag)] for v in row] for row in mat]
        terms.append({"k": list(k), "matrix": rows})
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": phi.n,
        "dim_out": phi.dim_out,
        "dim_in": phi.dim_in,
        "terms": terms,
    }
    return json.dumps(doc, indent=1) + "\n"


def symbol_from_json(text: str, *, source: str = "<string>") -> LaurentSymbol:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{source}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ValueError(f"{source}: top-level value must be an object")
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"{source}: field 'format' must be {FORMAT_NAME!r}")
    for field in ("n", "dim_out", "dim_in", "terms"):
        if field not in doc:
            raise ValueError(f"{source}: missing field {field!r}")
    n, dim_out, dim_in = int(doc["n"]), int(doc["dim_out"]), int(doc["dim_in"])
    terms = {}
    for idx, term in enumerate(doc["terms"]):
        for field in ("k", "matrix"):
            if field not in term:
                raise ValueError(f"{source}: term {idx}: missing field {field!r}")
        k = tuple(int(c) for c in term["k"])
        if len(k) != n:
            raise ValueError(
                f"{source}: term {idx}: exponent length {len(k)} != n={n}")
        rows = term["matrix"]
        if len(rows) != dim_out or any(len(r) != dim_in for r in rows):
            raise ValueError(
                f"{source}: term {idx}: matrix is not {dim_out}x{dim_in}")
        mat = np.empty((dim_out, dim_in), dtype=complex)
        for i, row in enumerate(rows):
            for j, pair in enumerate(row):
                if not (isinstance(pair, list) and len(pair) == 2):
                    raise ValueError(
                        f"{source}: term {idx}: entry ({i},{j}) is not an "
                        f"[re, im] pair")
                mat[i, j] = complex(pair[0], pair[1])
        if k in terms:
            raise ValueError(f"{source}: duplicate exponent {k}")
        terms[k] = mat
    # drop_tol=0: reading must reproduce the written coefficients exactly
    return LaurentSymbol(n, dim_out, dim_in, terms, drop_tol=0.0)


def write_symbol(phi: LaurentSymbol, path) -> None:
    Path(path).write_text(symbol_to_json(phi), encoding="utf-8")


def read_symbol(path) -> LaurentSymbol:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"{p}: cannot read symbol document: {exc}") from exc
    return symbol_from_json(text, source=str(p))
