"""Clifford measurement circuits: conjugation, tableaux and synthesis.

A circuit ``gates = [g1, g2, ..., gm]`` is the unitary ``U = gm ... g2 g1``.
:func:`conjugate_sum` returns ``U H U^dag``; measuring its Ising form on
``U|psi>`` estimates ``<psi|H|psi>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import gf2
from .pauli import PauliProduct, PauliSum, commutes, qubit_wise_commutes

ONE_QUBIT = ("H", "S", "S_DAG")
GATE_KINDS = ONE_QUBIT + ("CNOT",)
_INVERSE = {"H": "H", "S": "S_DAG", "S_DAG": "S", "CNOT": "CNOT"}


class SynthesisError(RuntimeError):
    """A synthesized circuit failed to diagonalize its fragment."""


@dataclass(frozen=True)
class CliffordGate:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} takes {want} qubit(s)")
        if want == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT control equals target")

    def __str__(self):
        name = "SDG" if self.kind == "S_DAG" else self.kind
        return " ".join([name, *map(str, self.qubits)])


def H(q): return CliffordGate("H", (q,))
def S(q): return CliffordGate("S", (q,))
def S_DAG(q): return CliffordGate("S_DAG", (q,))
def CNOT(c, t): return CliffordGate("CNOT", (c, t))


@dataclass(frozen=True)
class CliffordCircuit:
    n_qubits: int
    gates: tuple[CliffordGate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} outside a {self.n_qubits}-qubit circuit")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other: "CliffordCircuit") -> "CliffordCircuit":
        return CliffordCircuit(self.n_qubits, self.gates + other.gates)

    def inverse(self) -> "CliffordCircuit":
        return CliffordCircuit(self.n_qubits,
                               [CliffordGate(_INVERSE[g.kind], g.qubits) for g in reversed(self.gates)])


def format_circuit(c: CliffordCircuit) -> str:
    return "".join(f"{g}\n" for g in c.gates)


def parse_circuit(text: str, n_qubits: int) -> CliffordCircuit:
    gates = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, *args = line.split()
        kind = "S_DAG" if name == "SDG" else name
        try:
            gates.append(CliffordGate(kind, tuple(int(a) for a in args)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return CliffordCircuit(n_qubits, gates)


def random_circuit(n_qubits: int, n_gates: int, rng: np.random.Generator) -> CliffordCircuit:
    gates = []
    for _ in range(n_gates):
        kind = GATE_KINDS[rng.integers(len(GATE_KINDS) if n_qubits > 1 else 3)]
        if kind == "CNOT":
            c, t = rng.choice(n_qubits, size=2, replace=False)
            gates.append(CNOT(int(c), int(t)))
        else:
            gates.append(CliffordGate(kind, (int(rng.integers(n_qubits)),)))
    return CliffordCircuit(n_qubits, gates)


# --- Pauli rows under conjugation --------------------------------------------

class PauliRows:
    """Stack of signed Pauli products as GF(2) arrays, updated gate by gate.

    Row ``i`` is ``(-1)**sign[i] * P(x[i], z[i])``.
    """

    def __init__(self, x: np.ndarray, z: np.ndarray, sign: np.ndarray | None = None):
        self.x = np.array(x, dtype=np.uint8)
        self.z = np.array(z, dtype=np.uint8)
        self.sign = np.zeros(len(self.x), dtype=np.uint8) if sign is None else np.array(sign, dtype=np.uint8)

    @classmethod
    def from_products(cls, n_qubits: int, products: Sequence[PauliProduct]):
        bits = np.arange(n_qubits)
        x = np.array([(p.x >> bits) & 1 for p in products], dtype=np.uint8).reshape(-1, n_qubits)
        z = np.array([(p.z >> bits) & 1 for p in products], dtype=np.uint8).reshape(-1, n_qubits)
        return cls(x, z)

    def products(self) -> list[PauliProduct]:
        n = self.x.shape[1]
        weights = 1 << np.arange(n, dtype=object)
        return [PauliProduct(n, int(xr.astype(object) @ weights), int(zr.astype(object) @ weights))
                for xr, zr in zip(self.x, self.z)]

    def apply(self, g: CliffordGate) -> None:
        x, z, s = self.x, self.z, self.sign
        if g.kind == "CNOT":
            c, t = g.qubits
            s ^= x[:, c] & z[:, t] & (x[:, t] ^ z[:, c] ^ 1)
            x[:, t] ^= x[:, c]
            z[:, c] ^= z[:, t]
            return
        (q,) = g.qubits
        if g.kind == "H":
            s ^= x[:, q] & z[:, q]
            x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
        elif g.kind == "S":
            s ^= x[:, q] & z[:, q]
            z[:, q] ^= x[:, q]
        else:  # S_DAG
            s ^= x[:, q] & (z[:, q] ^ 1)
            z[:, q] ^= x[:, q]

    def apply_all(self, gates: Iterable[CliffordGate]) -> "PauliRows":
        for g in gates:
            self.apply(g)
        return self


def conjugate_sum(circuit: CliffordCircuit, h: PauliSum) -> PauliSum:
    """``U h U^dag`` for the circuit unitary ``U``."""
    if circuit.n_qubits != h.n_qubits:
        raise ValueError(f"width mismatch: circuit {circuit.n_qubits}, operator {h.n_qubits}")
    if not h.terms:
        return h
    rows = PauliRows.from_products(h.n_qubits, h.products).apply_all(circuit.gates)
    signs = 1.0 - 2.0 * rows.sign
    return PauliSum(h.n_qubits, zip(h.coeffs * signs, rows.products()))


@dataclass(frozen=True)
class Tableau:
    """Images of ``X_0..X_{n-1}, Z_0..Z_{n-1}`` under conjugation by a circuit."""

    n_qubits: int
    matrix: np.ndarray  # (2n, 2n): row = [x | z] of an image
    phase: np.ndarray  # (2n,) sign bits

    @classmethod
    def identity(cls, n: int) -> "Tableau":
        return cls(n, np.eye(2 * n, dtype=np.uint8), np.zeros(2 * n, dtype=np.uint8))

    @classmethod
    def from_circuit(cls, circuit: CliffordCircuit) -> "Tableau":
        n = circuit.n_qubits
        eye = np.eye(n, dtype=np.uint8)
        zero = np.zeros((n, n), dtype=np.uint8)
        rows = PauliRows(np.vstack([eye, zero]), np.vstack([zero, eye])).apply_all(circuit.gates)
        return cls(n, np.hstack([rows.x, rows.z]), rows.sign)

    def is_symplectic(self) -> bool:
        n = self.n_qubits
        lam = np.block([[np.zeros((n, n), dtype=np.uint8), np.eye(n, dtype=np.uint8)],
                        [np.eye(n, dtype=np.uint8), np.zeros((n, n), dtype=np.uint8)]])
        return np.array_equal(gf2.matmul(gf2.matmul(self.matrix, lam), self.matrix.T), lam)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Tableau) and self.n_qubits == other.n_qubits
                and np.array_equal(self.matrix, other.matrix)
                and np.array_equal(self.phase, other.phase))


# --- counting and cleanup ----------------------------------------------------

def gate_counts(circuit: CliffordCircuit, y_cost: int = 2) -> tuple[int, int]:
    """``(G1, G2)``. With ``y_cost=1`` an ``S_DAG`` followed on its wire by ``H``
    counts as a single one-qubit gate."""
    if y_cost not in (1, 2):
        raise ValueError("y_cost must be 1 or 2")
    g1 = sum(g.kind in ONE_QUBIT for g in circuit.gates)
    g2 = len(circuit.gates) - g1
    if y_cost == 1:
        last: dict[int, str] = {}
        for g in circuit.gates:
            if g.kind == "H" and last.get(g.qubits[0]) == "S_DAG":
                g1 -= 1
                last[g.qubits[0]] = ""
                continue
            for q in g.qubits:
                last[q] = g.kind
    return g1, g2


def _cancels(a: CliffordGate, b: CliffordGate) -> bool:
    return a.qubits == b.qubits and _INVERSE[a.kind] == b.kind


def peephole_cleanup(circuit: CliffordCircuit) -> CliffordCircuit:
    """Remove gate pairs that are adjacent on their wires and multiply to identity."""
    out: list[CliffordGate | None] = []
    stacks: dict[int, list[int]] = {}
    for g in circuit.gates:
        tops = {stacks[q][-1] if stacks.get(q) else None for q in g.qubits}
        if len(tops) == 1:
            (top,) = tops
            if top is not None and _cancels(out[top], g):
                for q in g.qubits:
                    stacks[q].pop()
                out[top] = None
                continue
        out.append(g)
        for q in g.qubits:
            stacks.setdefault(q, []).append(len(out) - 1)
    return CliffordCircuit(circuit.n_qubits, [g for g in out if g is not None])


# --- synthesis ---------------------------------------------------------------

def _check_ising(circuit: CliffordCircuit, fragment: PauliSum) -> None:
    if not conjugate_sum(circuit, fragment).is_ising():
        raise SynthesisError("synthesized circuit does not bring the fragment to Ising form")


def synthesize_qwc(fragment: PauliSum) -> CliffordCircuit:
    """Single-qubit basis changes: X -> [H], Y -> [S_DAG, H], Z/I -> nothing."""
    n = fragment.n_qubits
    basis: dict[int, str] = {}
    for _, p in fragment.terms:
        for q in range(n):
            letter = p.letter(q)
            if letter == "I":
                continue
            if basis.setdefault(q, letter) != letter:
                raise ValueError(f"fragment is not qubit-wise commuting on qubit {q}")
    gates: list[CliffordGate] = []
    for q in sorted(basis):
        if basis[q] == "X":
            gates.append(H(q))
        elif basis[q] == "Y":
            gates += [S_DAG(q), H(q)]
    circuit = CliffordCircuit(n, gates)
    _check_ising(circuit, fragment)
    return circuit


class _EchelonBasis:
    """Incrementally maintained GF(2) row space."""

    def __init__(self, width: int):
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []
        self.width = width

    def reduce(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        for p, r in zip(self.pivots, self.rows):
            if v[p]:
                v ^= r
        return v

    def add(self, v: np.ndarray) -> bool:
        r = self.reduce(v)
        nz = np.flatnonzero(r)
        if not len(nz):
            return False
        p = nz[0]
        for i, row in enumerate(self.rows):
            if row[p]:
                self.rows[i] = row ^ r
        self.rows.append(r)
        self.pivots.append(int(p))
        return True

    def __len__(self):
        return len(self.rows)


def _symplectic(a: np.ndarray, b: np.ndarray, m: int) -> int:
    return int((a[:m] @ b[m:] + a[m:] @ b[:m]) % 2)


def _lagrangian_completion(gens: list[np.ndarray], m: int) -> np.ndarray:
    """Extend independent commuting ``[x|z]`` rows to ``m`` rows (a stabilizer group)."""
    rows = list(gens)
    span = _EchelonBasis(2 * m)
    for r in rows:
        span.add(r)
    candidates = []
    for offset in (m, 0):  # single-qubit Z first, then X, then Y
        for q in range(m):
            v = np.zeros(2 * m, dtype=np.uint8)
            v[offset + q] = 1
            candidates.append(v)
    for q in range(m):
        v = np.zeros(2 * m, dtype=np.uint8)
        v[q] = v[m + q] = 1
        candidates.append(v)
    for v in candidates:
        if len(rows) == m:
            break
        if all(_symplectic(v, r, m) == 0 for r in rows) and span.add(v):
            rows.append(v)
    while len(rows) < m:
        mat = np.array(rows, dtype=np.uint8)
        # v commutes with every row iff [z | x] v = 0
        null = gf2.nullspace(np.hstack([mat[:, m:], mat[:, :m]]))
        for v in null:
            if span.add(v):
                rows.append(v)
                break
        else:  # unreachable for an isotropic input
            raise SynthesisError("could not complete the commuting set")
    return np.array(rows, dtype=np.uint8)


def _lower_cholesky(sym: np.ndarray):
    """Unit lower-triangular ``L`` and diagonal bits ``d`` with ``sym + diag(d) = L L^T``."""
    m = sym.shape[0]
    L = np.eye(m, dtype=np.uint8)
    for j in range(m):
        for i in range(j + 1, m):
            L[i, j] = (sym[i, j] + int(L[i, :j] @ L[j, :j])) % 2
    d = (sym.diagonal() + L.sum(axis=1)) % 2
    return L, d.astype(np.uint8)


def _cnot_gates(a: np.ndarray, qubits: Sequence[int]) -> list[CliffordGate]:
    return [CNOT(qubits[c], qubits[t]) for c, t in gf2.synthesize_linear(a)]


def _stabilizer_to_z(stab: np.ndarray, qubits: Sequence[int]) -> list[CliffordGate]:
    """Gates mapping every row of an ``m``-qubit stabilizer table to a Z product."""
    m = len(qubits)
    red, piv = gf2.row_reduce(stab)
    r = sum(p < m for p in piv)
    nonpiv = [c for c in range(m) if c not in piv[:r]]
    had: list[int] = []
    if r < m:
        zb = red[r:, m:][:, nonpiv]
        _, qpiv = gf2.row_reduce(zb)
        had = [nonpiv[i] for i in qpiv]
    gates = [H(qubits[q]) for q in had]
    rows = PauliRows(stab[:, :m], stab[:, m:])
    for q in had:
        rows.apply(H(q))

    # CNOT block bringing the X part to a permutation: column map M = X^-1 P
    xinv = gf2.inverse(rows.x)
    best = None
    perms = [np.arange(m)]
    _, assign = linear_sum_assignment(-rows.x.astype(float))
    perms.append(assign)
    for perm in perms:
        cols = gf2.matmul(xinv, np.eye(m, dtype=np.uint8)[:, perm])
        cand = gf2.synthesize_linear(cols.T)
        if best is None or len(cand) < len(best):
            best = cand
    block = [CNOT(c, t) for c, t in best]
    rows.apply_all(block)
    gates += [CNOT(qubits[g.qubits[0]], qubits[g.qubits[1]]) for g in block]

    rinv = gf2.inverse(rows.x)
    zsym = gf2.matmul(rinv, rows.z)
    if not np.array_equal(zsym, zsym.T):
        raise SynthesisError("rows of the stabilizer table do not commute")
    L, d = _lower_cholesky(zsym)
    gates += [S_DAG(qubits[q]) for q in np.flatnonzero(d)]
    gates += _cnot_gates(L.T, qubits)
    gates += [S(q) for q in qubits]
    gates += [H(q) for q in qubits]
    return gates


def synthesize_fc(fragment: PauliSum, prefer_local: bool = True) -> CliffordCircuit:
    """Clifford circuit diagonalizing a set of pairwise commuting products.

    Independent generators are completed to a stabilizer group on the qubits
    where some term has an X or Y factor; the group is then mapped to Z's via
    layers H - CNOT - S_DAG - CNOT - S - H, with both CNOT blocks produced by
    block Gaussian elimination.

    With ``prefer_local`` a fragment that is also qubit-wise commuting keeps
    the single-qubit circuit when that is cheaper.
    """
    n = fragment.n_qubits
    prods = fragment.products
    for i, p in enumerate(prods):
        for q in prods[i + 1:]:
            if not commutes(p, q):
                raise ValueError(f"fragment is not commuting: {p} vs {q}")
    if fragment.is_ising():
        return CliffordCircuit(n)
    rows = PauliRows.from_products(n, prods)
    active = np.flatnonzero(rows.x.any(axis=0))
    m = len(active)
    xz = np.hstack([rows.x[:, active], rows.z[:, active]])
    span = _EchelonBasis(2 * m)
    gens = [r for r in xz if span.add(r)]
    stab = _lagrangian_completion(gens, m)
    circuit = peephole_cleanup(CliffordCircuit(n, _stabilizer_to_z(stab, [int(q) for q in active])))
    _check_ising(circuit, fragment)
    if prefer_local and all(qubit_wise_commutes(p, q) for i, p in enumerate(prods) for q in prods[i + 1:]):
        local = synthesize_qwc(fragment)
        if sum(gate_counts(local)) <= sum(gate_counts(circuit)):
            return local
    return circuit


def synthesize(fragment: PauliSum, mode: str) -> CliffordCircuit:
    mode = mode.upper()
    if mode == "QWC":
        return synthesize_qwc(fragment)
    if mode == "FC":
        return synthesize_fc(fragment)
    raise ValueError(f"unknown grouping mode {mode!r}")
