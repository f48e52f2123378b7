"""Linear algebra over GF(2) and CNOT-circuit synthesis for linear reversible maps.

Matrices are ``uint8`` arrays holding 0/1.
"""
from __future__ import annotations

import math

import numpy as np


def row_reduce(m: np.ndarray):
    """Reduced row-echelon form. Returns ``(rref, pivot_columns)``."""
    a = np.array(m, dtype=np.uint8) & 1
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(a[r:, c]) + r
        if not len(hits):
            continue
        p = hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: np.ndarray) -> int:
    return len(row_reduce(m)[1])


def independent_rows(m: np.ndarray) -> list[int]:
    """Indices of a maximal independent subset of rows, greedily in row order."""
    m = np.asarray(m, dtype=np.uint8)
    basis = np.zeros((0, m.shape[1]), dtype=np.uint8)
    keep = []
    for i, row in enumerate(m):
        cand = np.vstack([basis, row])
        if rank(cand) > len(keep):
            basis = cand
            keep.append(i)
    return keep


def inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    aug = np.hstack([np.asarray(m, dtype=np.uint8) & 1, np.eye(n, dtype=np.uint8)])
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    return red[:, n:].copy()


def nullspace(m: np.ndarray) -> np.ndarray:
    """Basis (as rows) of ``{v : m v = 0}``."""
    m = np.asarray(m, dtype=np.uint8)
    cols = m.shape[1]
    red, piv = row_reduce(m)
    free = [c for c in range(cols) if c not in piv]
    out = np.zeros((len(free), cols), dtype=np.uint8)
    for k, f in enumerate(free):
        out[k, f] = 1
        for r, p in enumerate(piv):
            out[k, p] = red[r, f]
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64) % 2).astype(np.uint8)


def block_size(n: int) -> int:
    """Section width ``ceil(log2(n) / 2)``, at least 1."""
    if n < 2:
        return 1
    return max(1, math.ceil(math.log2(n) / 2))


def _lower_pass(a: np.ndarray, m: int):
    """Clear the strictly-lower triangle with row additions.

    Returns the reduced matrix and the row operations ``(src, dst)`` meaning
    ``a[dst] ^= a[src]``, in the order applied.
    """
    n = a.shape[0]
    ops = []
    for start in range(0, n, m):
        stop = min(start + m, n)
        # rows sharing a sub-row pattern in this section are merged first
        seen = {}
        for row in range(start, n):
            pat = a[row, start:stop].tobytes()
            if not any(a[row, start:stop]):
                continue
            if pat in seen:
                a[row] ^= a[seen[pat]]
                ops.append((seen[pat], row))
            else:
                seen[pat] = row
        for col in range(start, stop):
            diag_one = a[col, col] == 1
            for row in range(col + 1, n):
                if a[row, col]:
                    if not diag_one:
                        a[col] ^= a[row]
                        ops.append((row, col))
                        diag_one = True
                    a[row] ^= a[col]
                    ops.append((col, row))
    return a, ops


def synthesize_linear(a: np.ndarray, section: int | None = None) -> list[tuple[int, int]]:
    """CNOT list ``(control, target)`` whose circuit maps basis bits ``b -> a b``.

    Block Gaussian elimination with section width ``section`` (default
    :func:`block_size`), giving ``O(n^2 / log n)`` gates.
    """
    a = np.array(a, dtype=np.uint8) & 1
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    m = section or block_size(n)
    upper, lower_ops = _lower_pass(a, m)
    ident, upper_ops = _lower_pass(upper.T.copy(), m)
    if not np.array_equal(ident, np.eye(n, dtype=np.uint8)):
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    # E a = U and F U^T = I, so a = E^-1 F^-T: transposed F ops act first,
    # then the E ops in reverse.
    gates = [(dst, src) for src, dst in upper_ops]
    gates += [(src, dst) for src, dst in reversed(lower_ops)]
    return gates


def linear_map_of(gates: list[tuple[int, int]], n: int) -> np.ndarray:
    """Matrix of a CNOT circuit acting on basis bits."""
    a = np.eye(n, dtype=np.uint8)
    for c, t in gates:
        a[t] ^= a[c]
    return a
