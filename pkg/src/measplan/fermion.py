"""Molecular integrals, second quantization and fermion-to-qubit encodings.

Spin orbitals are interleaved: spatial orbital ``p`` gives spin-orbital
``2p`` (alpha) and ``2p + 1`` (beta).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, TextIO

import numpy as np

from .pauli import PauliSum, product_phase


class FcidumpError(ValueError):
    """Raised for malformed FCIDUMP input; the message names the line."""


@dataclass(frozen=True)
class MolecularIntegrals:
    n_orbitals: int
    e_nuc: float
    h1: np.ndarray
    h2: np.ndarray  # chemist notation (pq|rs)
    n_electrons: int | None = None
    ms2: int = 0

    @property
    def n_spin_orbitals(self) -> int:
        return 2 * self.n_orbitals


_HEADER_KEY = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z0-9_]+\s*=|$)")


def _parse_header(text: str) -> dict[str, str]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.I)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.I)
    return {k.upper(): v.strip().rstrip(",") for k, v in _HEADER_KEY.findall(body.replace("\n", " "))}


def parse_fcidump(stream: TextIO | Iterable[str]) -> MolecularIntegrals:
    """Read an FCIDUMP stream (Fortran namelist header then ``value p q r s`` lines)."""
    lines = list(stream)
    header = []
    body_start = None
    for i, line in enumerate(lines):
        header.append(line)
        stripped = line.strip().upper()
        if stripped.endswith("&END") or stripped == "/" or stripped.endswith("/"):
            body_start = i + 1
            break
    if body_start is None:
        raise FcidumpError("line 1: header is not terminated by &END or /")
    fields = _parse_header("".join(header))
    if "NORB" not in fields:
        raise FcidumpError("line 1: header lacks NORB")
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"]) if "NELEC" in fields else None
        ms2 = int(fields.get("MS2", 0))
    except ValueError as exc:
        raise FcidumpError(f"line 1: bad header value ({exc})") from None
    if norb <= 0:
        raise FcidumpError("line 1: NORB must be positive")

    h1 = np.zeros((norb, norb))
    h2 = np.zeros((norb, norb, norb, norb))
    e_nuc = 0.0
    for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FcidumpError(f"line {lineno}: expected 'value p q r s', got {line.strip()!r}")
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            p, q, r, s = (int(t) for t in parts[1:])
        except ValueError:
            raise FcidumpError(f"line {lineno}: non-numeric field in {line.strip()!r}") from None
        if not all(0 <= k <= norb for k in (p, q, r, s)):
            raise FcidumpError(f"line {lineno}: orbital index out of range 1..{norb}")
        if p and q and r and s:
            p, q, r, s = p - 1, q - 1, r - 1, s - 1
            for a, b, c, d in ((p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r)):
                h2[a, b, c, d] = value
                h2[c, d, a, b] = value
        elif p and q and not r and not s:
            h1[p - 1, q - 1] = h1[q - 1, p - 1] = value
        elif not (p or q or r or s):
            e_nuc = value
        elif p and not q and not r and not s:
            continue  # orbital energy, not needed
        else:
            raise FcidumpError(f"line {lineno}: unsupported index pattern {p} {q} {r} {s}")
    return MolecularIntegrals(norb, e_nuc, h1, h2, nelec, ms2)


def read_fcidump(path) -> MolecularIntegrals:
    with open(path, encoding="utf-8") as fh:
        return parse_fcidump(fh)


@dataclass(frozen=True)
class FermionOperator:
    """Sum of ladder strings; each op is ``(spin_orbital, is_creation)``.

    An empty op tuple is the identity.
    """

    terms: tuple[tuple[float, tuple[tuple[int, bool], ...]], ...]

    def max_index(self) -> int:
        return max((i for _, ops in self.terms for i, _ in ops), default=-1)

    def dagger(self) -> "FermionOperator":
        return FermionOperator(tuple(
            (c, tuple((i, not cr) for i, cr in reversed(ops))) for c, ops in self.terms
        ))

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        return FermionOperator(self.terms + other.terms)


def build_second_quantized(mi: MolecularIntegrals, tol: float = 1e-14) -> FermionOperator:
    """Spin-orbital electronic Hamiltonian from spatial integrals."""
    n = mi.n_orbitals
    terms: list = [(float(mi.e_nuc), ())] if mi.e_nuc != 0.0 else []
    for p in range(n):
        for q in range(n):
            v = mi.h1[p, q]
            if abs(v) < tol:
                continue
            for s in (0, 1):
                terms.append((float(v), ((2 * p + s, True), (2 * q + s, False))))
    for p, q, r, s in zip(*np.nonzero(np.abs(mi.h2) >= tol)):
        v = 0.5 * float(mi.h2[p, q, r, s])
        for a in (0, 1):
            for b in (0, 1):
                i, j, k, l = 2 * p + a, 2 * r + b, 2 * s + b, 2 * q + a
                if i == j or k == l:
                    continue
                terms.append((v, ((i, True), (j, True), (k, False), (l, False))))
    return FermionOperator(tuple(terms))


def number_operator_fermion(n_spin_orbitals: int, spin: int | None = None) -> FermionOperator:
    """``sum_j a_j^dag a_j`` over all spin orbitals, or one spin channel (0 alpha, 1 beta)."""
    modes = range(n_spin_orbitals) if spin is None else range(spin, n_spin_orbitals, 2)
    return FermionOperator(tuple((1.0, ((j, True), (j, False))) for j in modes))


# --- encodings ---------------------------------------------------------------

def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def update_set(j: int, n: int) -> list[int]:
    """Qubits other than ``j`` whose stored parity includes mode ``j``."""
    out, i = [], j + 1
    i += i & -i
    while i <= n:
        out.append(i - 1)
        i += i & -i
    return out


def parity_set(j: int) -> list[int]:
    """Qubits whose stored values sum to the parity of modes ``0..j-1``."""
    out, i = [], j
    while i > 0:
        out.append(i - 1)
        i -= i & -i
    return out


def flip_set(j: int) -> list[int]:
    """Qubits whose stored parity, together with qubit ``j``, gives occupation of ``j``."""
    out, top = [], j + 1
    i, stop = top - 1, top - (top & -top)
    while i > stop:
        out.append(i - 1)
        i -= i & -i
    return out


def remainder_set(j: int) -> list[int]:
    flips = set(flip_set(j))
    return [k for k in parity_set(j) if k not in flips]


@lru_cache(maxsize=None)
def _ladder_jw(j: int, n: int, creation: bool):
    below = (1 << j) - 1
    bit = 1 << j
    sign = -1 if creation else 1
    return ((0.5, bit, below), (0.5j * sign, bit, below | bit))


@lru_cache(maxsize=None)
def _ladder_bk(j: int, n: int, creation: bool):
    bit = 1 << j
    up = _mask(update_set(j, n))
    par = _mask(parity_set(j))
    rem = _mask(remainder_set(j))
    sign = -1 if creation else 1
    return ((0.5, bit | up, par), (0.5j * sign, bit | up, bit | rem))


_LADDERS = {"jw": _ladder_jw, "bk": _ladder_bk}


def encode(f: FermionOperator, n_spin_orbitals: int, mapping: str = "bk") -> PauliSum:
    """Map a fermionic operator to a qubit :class:`PauliSum`."""
    try:
        ladder = _LADDERS[mapping]
    except KeyError:
        raise ValueError(f"unknown mapping {mapping!r}; choose 'jw' or 'bk'") from None
    if f.max_index() >= n_spin_orbitals:
        raise ValueError(f"mode index {f.max_index()} exceeds {n_spin_orbitals} spin orbitals")
    acc: dict[tuple[int, int], complex] = {}
    for coeff, ops in f.terms:
        cur = {(0, 0): complex(coeff)}
        for j, creation in ops:
            nxt: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in cur.items():
                for c2, x2, z2 in ladder(j, n_spin_orbitals, creation):
                    key = (x1 ^ x2, z1 ^ z2)
                    nxt[key] = nxt.get(key, 0) + c1 * c2 * (1j ** product_phase(x1, z1, x2, z2))
            cur = nxt
        for key, c in cur.items():
            acc[key] = acc.get(key, 0) + c
    return PauliSum.from_dict(n_spin_orbitals, acc)


def jordan_wigner(f: FermionOperator, n_spin_orbitals: int) -> PauliSum:
    return encode(f, n_spin_orbitals, "jw")


def bravyi_kitaev(f: FermionOperator, n_spin_orbitals: int) -> PauliSum:
    return encode(f, n_spin_orbitals, "bk")


def qubit_hamiltonian(mi: MolecularIntegrals, mapping: str = "bk") -> PauliSum:
    return encode(build_second_quantized(mi), mi.n_spin_orbitals, mapping)
