"""Sorted Insertion grouping of Pauli sums into measurable fragments."""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .pauli import (PauliProduct, PauliSum, commutes, format_pauli, qubit_wise_commutes,
                    sum_square_coeffs)

MODES = ("FC", "QWC")
RECONSTRUCTION_TOL = 1e-10


def _normalize_mode(mode: str) -> str:
    m = str(mode).upper()
    if m not in MODES:
        raise ValueError(f"unknown grouping mode {mode!r}; choose FC or QWC")
    return m


def compatible(mode: str):
    return commutes if _normalize_mode(mode) == "FC" else qubit_wise_commutes


@dataclass(frozen=True)
class FragmentSet:
    mode: str
    fragments: tuple[PauliSum, ...]
    source_terms: int
    constant: float = 0.0

    @property
    def n_fragments(self) -> int:
        return len(self.fragments)

    @property
    def sizes(self) -> list[int]:
        return [len(f) for f in self.fragments]

    def merged(self, i: int, j: int) -> "FragmentSet":
        """Copy with fragments ``i`` and ``j`` combined (no compatibility check)."""
        keep = [f for k, f in enumerate(self.fragments) if k not in (i, j)]
        keep.insert(min(i, j), self.fragments[i] + self.fragments[j])
        return FragmentSet(self.mode, tuple(keep), self.source_terms, self.constant)


@numba.njit(cache=True)
def _si_kernel(xs, zs, qwc):
    n = xs.shape[0]
    group = np.empty(n, dtype=np.int64)
    head = np.full(n, -1, dtype=np.int64)
    tail = np.full(n, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    ngroups = 0
    for t in range(n):
        x1 = xs[t]
        z1 = zs[t]
        placed = -1
        for g in range(ngroups):
            ok = True
            m = head[g]
            while m >= 0:
                x2 = xs[m]
                z2 = zs[m]
                if qwc:
                    if (x1 | z1) & (x2 | z2) & ((x1 ^ x2) | (z1 ^ z2)):
                        ok = False
                else:
                    w = (x1 & z2) ^ (z1 & x2)
                    w ^= w >> np.uint64(32)
                    w ^= w >> np.uint64(16)
                    w ^= w >> np.uint64(8)
                    w ^= w >> np.uint64(4)
                    w ^= w >> np.uint64(2)
                    w ^= w >> np.uint64(1)
                    if w & np.uint64(1):
                        ok = False
                if not ok:
                    break
                m = nxt[m]
            if ok:
                placed = g
                break
        if placed < 0:
            placed = ngroups
            head[placed] = t
            ngroups += 1
        else:
            nxt[tail[placed]] = t
        tail[placed] = t
        group[t] = placed
    return group


def _si_python(terms, mode):
    ok = compatible(mode)
    groups: list[list] = []
    labels = []
    for c, p in terms:
        for gi, members in enumerate(groups):
            if all(ok(p, q) for _, q in members):
                members.append((c, p))
                labels.append(gi)
                break
        else:
            groups.append([(c, p)])
            labels.append(len(groups) - 1)
    return labels


def sort_terms(h: PauliSum):
    """Decreasing ``|coeff|``, ties by ascending formatted Pauli string."""
    return sorted(h.terms, key=lambda t: (-abs(t[0]), format_pauli(t[1])))


def sorted_insertion(h: PauliSum, mode: str = "FC") -> FragmentSet:
    """Greedy first-fit grouping in order of decreasing coefficient magnitude.

    The identity term is removed first and kept as ``FragmentSet.constant``.
    """
    mode = _normalize_mode(mode)
    constant, rest = h.split_identity()
    terms = sort_terms(rest)
    if not terms:
        return FragmentSet(mode, (), 0, constant)
    if h.n_qubits <= 64:
        xs = np.array([p.x for _, p in terms], dtype=np.uint64)
        zs = np.array([p.z for _, p in terms], dtype=np.uint64)
        labels = _si_kernel(xs, zs, mode == "QWC")
    else:
        labels = _si_python(terms, mode)
    buckets: dict[int, list] = {}
    for lab, term in zip(labels, terms):
        buckets.setdefault(int(lab), []).append(term)
    fragments = tuple(PauliSum(h.n_qubits, buckets[g]) for g in sorted(buckets))
    return FragmentSet(mode, fragments, len(terms), constant)


@dataclass
class ValidationReport:
    n_fragments: int
    sizes: list[int]
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_partition(fs: FragmentSet, h: PauliSum) -> ValidationReport:
    """Check reconstruction of ``h`` and pairwise compatibility of every fragment."""
    ok = compatible(fs.mode)
    report = ValidationReport(fs.n_fragments, fs.sizes)
    for k, frag in enumerate(fs.fragments):
        if not frag.terms:
            report.violations.append(f"fragment {k} is empty")
        prods = frag.products
        for i, p in enumerate(prods):
            for q in prods[i + 1:]:
                if not ok(p, q):
                    report.violations.append(
                        f"fragment {k}: [{format_pauli(p)}] and [{format_pauli(q)}] are not {fs.mode}-compatible")
    total: dict = {}
    for frag in fs.fragments:
        for c, p in frag.terms:
            total[p.key] = total.get(p.key, 0.0) + c
    if fs.constant:
        total[(0, 0)] = total.get((0, 0), 0.0) + fs.constant
    target = h.as_dict()
    for key in sorted(set(total) | set(target)):
        a, b = total.get(key, 0.0), target.get(key, 0.0)
        if abs(a - b) > RECONSTRUCTION_TOL:
            label = format_pauli(PauliProduct(h.n_qubits, *key))
            report.violations.append(f"term [{label}]: fragments give {a!r}, Hamiltonian has {b!r}")
    return report


def fragment_square_sums(fs: FragmentSet) -> list[float]:
    return [sum_square_coeffs(f) for f in fs.fragments]
