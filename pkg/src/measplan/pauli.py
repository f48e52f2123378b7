"""Pauli products and real-weighted Pauli sums in symplectic form.

A product on ``n`` qubits is stored as two integer bit masks ``x`` and ``z``
plus a phase exponent ``k`` so that the operator is ``i**k`` times the tensor
product of ``P(x_q, z_q)`` with

    P(0, 0) = I,  P(1, 0) = X,  P(0, 1) = Z,  P(1, 1) = Y.

Bit ``q`` of a mask refers to qubit ``q``; qubit 0 is the least significant
bit of a computational-basis index.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

COEFF_TOL = 1e-12
IMAG_TOL = 1e-8

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_TOKEN = re.compile(r"^([XYZ])(\d+)$")


class PauliError(ValueError):
    """Malformed Pauli text or inconsistent operands."""


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliProduct:
    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if self.n_qubits < 0 or not (0 <= self.x < limit and 0 <= self.z < limit):
            raise PauliError(f"masks do not fit in {self.n_qubits} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliProduct":
        return cls(n_qubits)

    @classmethod
    def from_label(cls, label: str) -> "PauliProduct":
        """Build from a dense label such as ``"XIZY"`` (character ``q`` is qubit ``q``)."""
        x = z = 0
        for q, ch in enumerate(label):
            if ch == "I":
                continue
            if ch not in _BITS:
                raise PauliError(f"bad Pauli letter {ch!r}")
            bx, bz = _BITS[ch]
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z)

    @property
    def key(self) -> tuple[int, int]:
        return (self.x, self.z)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def letter(self, q: int) -> str:
        return _LETTER[((self.x >> q) & 1, (self.z >> q) & 1)]

    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def without_phase(self) -> "PauliProduct":
        return PauliProduct(self.n_qubits, self.x, self.z)

    def __mul__(self, other: "PauliProduct") -> "PauliProduct":
        return multiply(self, other)

    def __str__(self) -> str:
        return format_pauli(self)


def _check_width(p: PauliProduct, q: PauliProduct) -> None:
    if p.n_qubits != q.n_qubits:
        raise PauliError(f"qubit-count mismatch: {p.n_qubits} vs {q.n_qubits}")


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent of ``i`` picked up by ``P(x1,z1) P(x2,z2)`` (both phase-free)."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    return (_popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2)
            - _popcount(x3 & z3)) % 4


def multiply(p: PauliProduct, q: PauliProduct) -> PauliProduct:
    _check_width(p, q)
    k = p.phase + q.phase + product_phase(p.x, p.z, q.x, q.z)
    return PauliProduct(p.n_qubits, p.x ^ q.x, p.z ^ q.z, k)


def commutes(p: PauliProduct, q: PauliProduct) -> bool:
    _check_width(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def qubit_wise_commutes(p: PauliProduct, q: PauliProduct) -> bool:
    _check_width(p, q)
    clash = (p.x | p.z) & (q.x | q.z) & ((p.x ^ q.x) | (p.z ^ q.z))
    return clash == 0


def is_ising(p: PauliProduct) -> bool:
    return p.x == 0


def parse_pauli(text: str, n_qubits: int) -> PauliProduct:
    """Parse ``"X0 Z3"``-style text; the literal ``"I"`` is the identity."""
    tokens = text.split()
    if tokens == ["I"]:
        return PauliProduct(n_qubits)
    if not tokens:
        raise PauliError("empty Pauli string")
    x = z = 0
    seen = set()
    for tok in tokens:
        m = _TOKEN.match(tok)
        if m is None:
            raise PauliError(f"malformed Pauli token {tok!r}")
        q = int(m.group(2))
        if q >= n_qubits:
            raise PauliError(f"qubit index {q} out of range for {n_qubits} qubits")
        if q in seen:
            raise PauliError(f"duplicate qubit index {q}")
        seen.add(q)
        bx, bz = _BITS[m.group(1)]
        x |= bx << q
        z |= bz << q
    return PauliProduct(n_qubits, x, z)


def format_pauli(p: PauliProduct) -> str:
    """Inverse of :func:`parse_pauli`; the phase is not part of the text."""
    support = p.x | p.z
    if support == 0:
        return "I"
    return " ".join(f"{p.letter(q)}{q}" for q in range(p.n_qubits) if (support >> q) & 1)


class PauliSum:
    """Hermitian observable ``sum_k c_k P_k`` with real ``c_k``.

    Construction canonicalizes: products are folded to phase 0, duplicates
    merged, near-zero terms dropped and terms sorted by ``(x, z)``. Instances
    are treated as immutable.
    """

    __slots__ = ("n_qubits", "terms", "_arrays")

    def __init__(self, n_qubits: int, terms: Iterable = (), *, tol: float = COEFF_TOL):
        acc: dict[tuple[int, int], complex] = {}
        for coeff, prod in terms:
            if prod.n_qubits != n_qubits:
                raise PauliError(f"term on {prod.n_qubits} qubits in a {n_qubits}-qubit sum")
            c = complex(coeff) * (1j ** prod.phase)
            acc[prod.key] = acc.get(prod.key, 0.0) + c
        self.n_qubits = n_qubits
        self.terms = _canonical_terms(n_qubits, acc, tol)
        self._arrays = {}

    @classmethod
    def from_dict(cls, n_qubits: int, coeffs: dict, tol: float = COEFF_TOL) -> "PauliSum":
        """Build from ``{(x_mask, z_mask): coeff}`` without per-term objects."""
        obj = cls.__new__(cls)
        obj.n_qubits = n_qubits
        obj.terms = _canonical_terms(n_qubits, coeffs, tol)
        obj._arrays = {}
        return obj

    @classmethod
    def from_strings(cls, n_qubits: int, items: Iterable[tuple[float, str]]) -> "PauliSum":
        return cls(n_qubits, [(c, parse_pauli(s, n_qubits)) for c, s in items])

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_qubits, self.terms))

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @property
    def products(self) -> list[PauliProduct]:
        return [p for _, p in self.terms]

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {p.key: c for c, p in self.terms}

    def masks(self) -> tuple[np.ndarray, np.ndarray]:
        """``(x, z)`` masks as uint64 arrays (at most 64 qubits)."""
        if "masks" not in self._arrays:
            if self.n_qubits > 64:
                raise PauliError("array kernels support at most 64 qubits")
            xs = np.array([p.x for _, p in self.terms], dtype=np.uint64)
            zs = np.array([p.z for _, p in self.terms], dtype=np.uint64)
            self._arrays["masks"] = (xs, zs)
        return self._arrays["masks"]

    def constant(self) -> float:
        return self.as_dict().get((0, 0), 0.0)

    def split_identity(self) -> tuple[float, "PauliSum"]:
        """Return ``(identity coefficient, remaining sum)``."""
        rest = {k: c for k, c in self.as_dict().items() if k != (0, 0)}
        return self.constant(), PauliSum.from_dict(self.n_qubits, rest)

    def is_ising(self) -> bool:
        return all(p.x == 0 for _, p in self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise PauliError("qubit-count mismatch")
        acc = dict(self.as_dict())
        for c, p in other.terms:
            acc[p.key] = acc.get(p.key, 0.0) + c
        return PauliSum.from_dict(self.n_qubits, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "PauliSum":
        return PauliSum.from_dict(self.n_qubits, {p.key: scalar * c for c, p in self.terms})

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product; the result must again be Hermitian."""
        if other.n_qubits != self.n_qubits:
            raise PauliError("qubit-count mismatch")
        acc: dict[tuple[int, int], complex] = {}
        for c1, p1 in self.terms:
            for c2, p2 in other.terms:
                k = product_phase(p1.x, p1.z, p2.x, p2.z)
                key = (p1.x ^ p2.x, p1.z ^ p2.z)
                acc[key] = acc.get(key, 0.0) + c1 * c2 * (1j ** k)
        return PauliSum.from_dict(self.n_qubits, acc)

    def __repr__(self) -> str:
        return f"PauliSum({self.n_qubits}, {len(self.terms)} terms)"

    def __str__(self) -> str:
        return " + ".join(f"{c:.6g} [{format_pauli(p)}]" for c, p in self.terms) or "0"


def _canonical_terms(n_qubits, acc, tol):
    out = []
    for (x, z), c in sorted(acc.items()):
        c = complex(c)
        if abs(c.imag) > IMAG_TOL:
            raise PauliError(
                f"non-Hermitian term {format_pauli(PauliProduct(n_qubits, x, z))}: "
                f"coefficient {c}"
            )
        if abs(c.real) < tol:
            continue
        out.append((float(c.real), PauliProduct(n_qubits, x, z)))
    return tuple(out)


def sum_square_coeffs(h: PauliSum) -> float:
    """``Tr[H^2] / 2^n``, i.e. the sum of squared coefficients."""
    return float(sum(c * c for c, _ in h.terms))
