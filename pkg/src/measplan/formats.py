"""Text and JSON formats: Hamiltonian files, fragment listings, reports.

Hamiltonian file::

    # any comment
    # meta mapping: bk
    qubits: 4
    constant: -0.0981
    0.1712 Z0
    -0.2228 Z0 Z1

Coefficients are written with ``repr`` so a write/read cycle is exact.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Iterable, TextIO

from .clifford import CliffordCircuit, format_circuit
from .grouping import FragmentSet
from .pauli import PauliError, PauliSum, format_pauli, parse_pauli, sum_square_coeffs

SCHEMA = 1


class FormatError(ValueError):
    """Malformed input file; the message names the offending line."""


def _lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def read_hamiltonian(source) -> tuple[PauliSum, dict]:
    """Parse a Hamiltonian file. Returns ``(PauliSum, metadata)``."""
    n_qubits = None
    constant = 0.0
    meta: dict[str, str] = {}
    raw: list[tuple[complex, object]] = []
    for lineno, line in enumerate(_lines(source), 1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            body = text[1:].strip()
            if body.startswith("meta ") and ":" in body:
                key, _, value = body[5:].partition(":")
                meta[key.strip()] = value.strip()
            continue
        text = text.split("#", 1)[0].strip()
        head, sep, rest = text.partition(":")
        if sep:
            key = head.strip().lower()
            if key not in ("qubits", "constant"):
                raise FormatError(f"line {lineno}: unknown header {head.strip()!r}")
            try:
                if key == "qubits":
                    n_qubits = int(rest)
                    if n_qubits < 1:
                        raise ValueError
                else:
                    constant += float(rest)
            except ValueError:
                raise FormatError(f"line {lineno}: bad value for {key!r}: {rest.strip()!r}") from None
            continue
        if n_qubits is None:
            raise FormatError(f"line {lineno}: term before the 'qubits: N' header")
        coeff_text, _, pauli_text = text.partition(" ")
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric coefficient {coeff_text!r}") from None
        try:
            prod = parse_pauli(pauli_text.strip() or "I", n_qubits)
        except PauliError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        raw.append((coeff, prod))
    if n_qubits is None:
        raise FormatError("missing 'qubits: N' header")
    if constant:
        raw.append((constant, parse_pauli("I", n_qubits)))
    return PauliSum(n_qubits, raw), meta


def format_hamiltonian(h: PauliSum, meta: dict | None = None) -> str:
    out = io.StringIO()
    for key in sorted(meta or {}):
        out.write(f"# meta {key}: {meta[key]}\n")
    out.write(f"qubits: {h.n_qubits}\n")
    constant, rest = h.split_identity()
    if constant:
        out.write(f"constant: {constant!r}\n")
    for c, p in rest.terms:
        out.write(f"{c!r} {format_pauli(p)}\n")
    return out.getvalue()


def write_hamiltonian(path, h: PauliSum, meta: dict | None = None) -> None:
    Path(path).write_text(format_hamiltonian(h, meta), encoding="utf-8")


def fragments_to_dict(fs: FragmentSet) -> dict:
    n = fs.fragments[0].n_qubits if fs.fragments else 0
    return {
        "schema": SCHEMA,
        "mode": fs.mode,
        "n_qubits": n,
        "constant": fs.constant,
        "source_terms": fs.source_terms,
        "n_fragments": fs.n_fragments,
        "fragments": [
            {
                "index": k,
                "size": len(f),
                "sum_sq": sum_square_coeffs(f),
                "terms": [[c, format_pauli(p)] for c, p in f.terms],
            }
            for k, f in enumerate(fs.fragments)
        ],
    }


def fragments_from_dict(d: dict) -> FragmentSet:
    if d.get("schema") != SCHEMA:
        raise FormatError(f"unsupported fragment schema {d.get('schema')!r}")
    n = int(d["n_qubits"])
    frags = tuple(PauliSum(n, [(c, parse_pauli(s, n)) for c, s in f["terms"]]) for f in d["fragments"])
    return FragmentSet(d["mode"], frags, int(d["source_terms"]), float(d["constant"]))


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, NaN written as null."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def provenance(paths: Iterable) -> list[dict]:
    return [{"path": str(p), "sha256": sha256_of(p)} for p in paths]


def write_csv(rows: list[dict], stream: TextIO, columns: list[str] | None = None) -> None:
    """Flat projection of report rows."""
    if not rows:
        return
    cols = columns or list(rows[0])
    w = csv.DictWriter(stream, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _clean(r.get(k)) for k in cols})


def circuit_text(circuit: CliffordCircuit) -> str:
    body = format_circuit(circuit)
    return body + ("\n" if body and not body.endswith("\n") else "")
