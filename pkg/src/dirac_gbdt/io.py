"""Canonical JSON for triples and reports, long-format CSV for evaluations."""

import csv
import hashlib
import json

import numpy as np

from .triples import ParameterTriple, Signature, SystemKind

__all__ = [
    "CSV_HEADER",
    "triple_to_dict",
    "triple_from_dict",
    "dumps_triple",
    "loads_triple",
    "save_triple",
    "load_triple",
    "triple_digest",
    "write_csv_rows",
]

CSV_HEADER = ("what", "k", "z_re", "z_im", "row", "col", "val_re", "val_im")


def _encode_matrix(M):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M)]


def _decode_matrix(data, shape, name):
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: not a matrix of [re, im] pairs") from exc
    if arr.shape != (*shape, 2):
        raise ValueError(f"{name}: expected shape {shape} of [re, im] pairs, got {arr.shape[:-1]}")
    return arr[..., 0] + 1j * arr[..., 1]


def triple_to_dict(t):
    # field order is part of the canonical form
    return {
        "kind": t.kind.value,
        "n": t.n,
        "m1": t.sig.m1,
        "m2": t.sig.m2,
        "A": _encode_matrix(t.A),
        "S0": _encode_matrix(t.S0),
        "Pi0": _encode_matrix(t.Pi0),
    }


def triple_from_dict(d):
    try:
        kind = SystemKind(d["kind"])
        n, m1, m2 = int(d["n"]), int(d["m1"]), int(d["m2"])
        A, S0, Pi0 = d["A"], d["S0"], d["Pi0"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed triple document: {exc}") from exc
    sig = Signature(m1, m2)
    return ParameterTriple(
        kind, sig,
        _decode_matrix(A, (n, n), "A"),
        _decode_matrix(S0, (n, n), "S0"),
        _decode_matrix(Pi0, (n, m1 + m2), "Pi0"),
    )


def dumps_triple(t):
    """Canonical text: fixed key order, compact separators, shortest float repr."""
    return json.dumps(triple_to_dict(t), separators=(",", ":"), allow_nan=False) + "\n"


def loads_triple(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("triple document must be a JSON object")
    return triple_from_dict(data)


def save_triple(t, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_triple(t))


def load_triple(path):
    with open(path, encoding="utf-8") as fh:
        return loads_triple(fh.read())


def triple_digest(t):
    return hashlib.sha256(dumps_triple(t).encode("utf-8")).hexdigest()


def write_csv_rows(fh, rows):
    """Write the header and ``(what, k, z, matrix)`` records in long format.

    ``k`` or ``z`` may be ``None`` and is then left empty.  Entries are emitted
    row-major, records in the order given.
    """
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    count = 0
    for what, k, z, M in rows:
        M = np.atleast_2d(M)
        z_re = "" if z is None else repr(float(np.real(z)))
        z_im = "" if z is None else repr(float(np.imag(z)))
        k_txt = "" if k is None else str(k)
        for r in range(M.shape[0]):
            for c in range(M.shape[1]):
                v = complex(M[r, c])
                writer.writerow((what, k_txt, z_re, z_im, r, c, repr(v.real), repr(v.imag)))
                count += 1
    return count
