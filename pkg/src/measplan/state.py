"""Statevector mechanics: Pauli-sum action, Lanczos ground states, Clifford
application, expectation values and sampling of depolarized measurements.

Basis index ``b`` has qubit ``q`` in state ``(b >> q) & 1``.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numba
import numpy as np

from .pauli import PauliError, PauliSum

log = logging.getLogger(__name__)

MAX_QUBITS = 20
NORM_TOL = 1e-10

numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
if "MEASPLAN_THREADS" in os.environ:
    numba.set_num_threads(int(os.environ["MEASPLAN_THREADS"]))


class ConvergenceError(RuntimeError):
    """Lanczos failed to reach the requested residual."""


class QubitCapError(ValueError):
    """Requested statevector width exceeds the configured cap."""


@dataclass(frozen=True)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def normalized(cls, amplitudes) -> "Statevector":
        amps = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(len(amps))))
        return cls(n, amps / np.linalg.norm(amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _amps(v, n_qubits: int) -> np.ndarray:
    amps = v.amplitudes if isinstance(v, Statevector) else np.asarray(v)
    if amps.shape != (1 << n_qubits,):
        raise PauliError(f"width mismatch: operator on {n_qubits} qubits, vector of length {amps.shape}")
    return amps


@numba.njit(cache=True, inline="always")
def _sign(w):
    # (-1)**popcount(w) as a float
    w ^= w >> np.uint64(32)
    w ^= w >> np.uint64(16)
    w ^= w >> np.uint64(8)
    w ^= w >> np.uint64(4)
    s = (np.uint64(0x6996) >> (w & np.uint64(0xF))) & np.uint64(1)
    return 1.0 - 2.0 * np.float64(s)


@numba.njit(cache=True, parallel=True, fastmath=True)
def _matvec_fly(group_x, group_start, zs, coefs, v, out):
    dim = v.shape[0]
    for b in numba.prange(dim):
        acc = out[b] * 0
        ub = np.uint64(b)
        for g in range(group_x.shape[0]):
            src = ub ^ group_x[g]
            part = coefs[0] * 0
            for t in range(group_start[g], group_start[g + 1]):
                part += coefs[t] * _sign(zs[t] & src)
            acc += part * v[np.int64(src)]
        out[b] = acc


@numba.njit(cache=True, parallel=True, fastmath=True)
def _diagonals(group_x, group_start, zs, coefs, dim, table):
    # table[g, b] = sum over group g of coef * (-1)**popcount(z & (b ^ x_g))
    for g in range(group_x.shape[0]):
        for b in numba.prange(dim):
            src = np.uint64(b) ^ group_x[g]
            part = coefs[0] * 0
            for t in range(group_start[g], group_start[g + 1]):
                part += coefs[t] * _sign(zs[t] & src)
            table[g, b] = part


@numba.njit(cache=True, parallel=True, fastmath=True)
def _matvec_table(group_x, table, v, out):
    dim = v.shape[0]
    for g in range(group_x.shape[0]):
        x = np.int64(group_x[g])
        for b in numba.prange(dim):
            out[b] += table[g, b] * v[b ^ x]


class _Kernel:
    """Terms of a PauliSum grouped by x-mask, with Y phases folded in.

    When the per-group diagonal tables fit in ``TABLE_BUDGET`` bytes they are
    computed once and reused by every product.
    """

    TABLE_BUDGET = 6e8

    def __init__(self, h: PauliSum):
        xs, zs = h.masks()
        c = h.coeffs.astype(complex)
        ny = np.bitwise_count(xs & zs).astype(np.int64) % 4
        c = c * (1j ** ny)
        order = np.lexsort((zs, xs))
        xs, zs, c = xs[order], zs[order], c[order]
        self.dim = 1 << h.n_qubits
        self.real = bool(np.all(ny % 2 == 0))
        self.coefs = c.real.copy() if self.real else c
        self.zs = zs.copy()
        if len(xs):
            starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
        else:
            starts = np.zeros(0, dtype=np.int64)
        self.group_x = xs[starts].copy() if len(xs) else np.zeros(0, dtype=np.uint64)
        self.group_start = np.r_[starts, len(xs)].astype(np.int64)
        self.table = None
        self._calls = 0

    def _build_table(self):
        size = len(self.group_x) * self.dim * self.coefs.itemsize
        if size > self.TABLE_BUDGET:
            return
        self.table = np.empty((len(self.group_x), self.dim), dtype=self.coefs.dtype)
        _diagonals(self.group_x, self.group_start, self.zs, self.coefs, self.dim, self.table)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        dtype = np.result_type(self.coefs.dtype, v.dtype)
        out = np.zeros(v.shape[0], dtype=dtype)
        if not len(self.coefs):
            return out
        v = v.astype(dtype, copy=False)
        self._calls += 1
        # repeated use (Lanczos) amortizes the table; one-off products do not
        if self.table is None and self._calls == 3:
            self._build_table()
        if self.table is not None:
            _matvec_table(self.group_x, self.table, v, out)
        else:
            _matvec_fly(self.group_x, self.group_start, self.zs, self.coefs.astype(dtype), v, out)
        return out


def _kernel(h: PauliSum) -> _Kernel:
    k = h._arrays.get("kernel")
    if k is None:
        k = h._arrays["kernel"] = _Kernel(h)
    return k


def apply_pauli_sum(h: PauliSum, v) -> np.ndarray:
    """``H @ v`` without forming a matrix."""
    return _kernel(h)(_amps(v, h.n_qubits))


def is_real_operator(h: PauliSum) -> bool:
    """True when every term has an even number of Y factors (real matrix)."""
    return _kernel(h).real


def expectation(h: PauliSum, v) -> float:
    amps = _amps(v, h.n_qubits)
    val = np.vdot(amps, apply_pauli_sum(h, amps))
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise ValueError(f"non-real expectation value {val}")
    return float(val.real)


def expectation_of_square(h: PauliSum, v) -> float:
    """``<v|H^2|v> = ||H v||^2``."""
    hv = apply_pauli_sum(h, v)
    return float(np.vdot(hv, hv).real)


def variance(h: PauliSum, v) -> float:
    amps = _amps(v, h.n_qubits)
    hv = apply_pauli_sum(h, amps)
    mean = np.vdot(amps, hv).real
    return float(max(np.vdot(hv, hv).real - mean * mean, 0.0))


def ising_diagonal(z: PauliSum) -> np.ndarray:
    """Diagonal of an all-Ising sum over the computational basis."""
    if not z.is_ising():
        raise ValueError("operator is not in Ising form")
    dim = 1 << z.n_qubits
    idx = np.arange(dim, dtype=np.uint64)
    diag = np.zeros(dim)
    for c, p in z.terms:
        par = np.bitwise_count(idx & np.uint64(p.z)) & 1
        diag += c * (1.0 - 2.0 * par)
    return diag


# --- Lanczos -----------------------------------------------------------------

def _orthogonalize(w, basis):
    for _ in range(2):
        if basis.shape[0]:
            w = w - basis.T @ (basis.conj() @ w)
    return w


def ground_state(h: PauliSum, tol: float = 1e-8, *, krylov_dim: int = 200,
                 max_restarts: int = 60, seed: int = 7, sector: np.ndarray | None = None,
                 max_qubits: int = MAX_QUBITS, memory_budget: float = 1.2e9):
    """Lowest eigenpair by restarted Lanczos with full reorthogonalization.

    ``sector`` optionally restricts the search to basis states where the
    boolean mask is true (for operators that conserve it, e.g. particle
    number). Returns ``(energy, Statevector)`` with ``||Hv - Ev|| <= tol``.
    """
    n = h.n_qubits
    if n > max_qubits:
        raise QubitCapError(f"{n} qubits exceeds the statevector cap of {max_qubits}")
    dim = 1 << n
    kern = _kernel(h)
    dtype = np.float64 if kern.real else np.complex128
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim).astype(dtype)
    if sector is not None:
        sector = np.asarray(sector, dtype=bool)
        v[~sector] = 0
    v /= np.linalg.norm(v)

    def op(x):
        y = kern(x)
        if sector is not None:
            y[~sector] = 0
        return y

    itemsize = np.dtype(dtype).itemsize
    m_max = int(min(krylov_dim, max(20, memory_budget // (dim * itemsize)), dim))
    e0 = float(np.vdot(v, op(v)).real)
    energy, resid = e0, np.inf
    for restart in range(max_restarts + 1):
        basis = np.zeros((m_max, dim), dtype=dtype)
        alpha, beta = [], []
        basis[0] = v
        for j in range(m_max):
            w = op(basis[j])
            alpha.append(float(np.vdot(basis[j], w).real))
            w = _orthogonalize(w, basis[: j + 1])
            b = float(np.linalg.norm(w))
            last = j + 1 == m_max or b < 1e-14
            if (j + 1) % 10 == 0 or last:
                evals, evecs = _tridiag_eig(alpha, beta)
                energy = float(evals[0])
                if b * abs(evecs[-1, 0]) < 0.1 * tol or last:
                    break
            beta.append(b)
            basis[j + 1] = w / b
        k = len(alpha)
        evals, evecs = _tridiag_eig(alpha, beta[: k - 1])
        v = evecs[:, 0].astype(dtype) @ basis[:k]
        v /= np.linalg.norm(v)
        del basis
        hv = op(v)
        energy = float(np.vdot(v, hv).real)
        resid = float(np.linalg.norm(hv - energy * v))
        log.debug("lanczos restart %d: E=%.12f residual=%.2e (k=%d)", restart, energy, resid, k)
        if resid <= tol:
            break
    else:
        raise ConvergenceError(f"Lanczos residual {resid:.2e} > {tol:.1e} after {max_restarts} restarts")
    if energy > e0 + 1e-12:
        raise ConvergenceError("Lanczos energy above start-vector expectation")
    return energy, Statevector(n, v.astype(complex))


def _tridiag_eig(alpha, beta):
    from scipy.linalg import eigh_tridiagonal

    if len(alpha) == 1:
        return np.array(alpha), np.ones((1, 1))
    return eigh_tridiagonal(np.array(alpha), np.array(beta[: len(alpha) - 1]))


# --- Clifford application and sampling ---------------------------------------

def apply_clifford(circuit, v) -> Statevector:
    """Apply a :class:`~measplan.clifford.CliffordCircuit` gate by gate."""
    n = circuit.n_qubits
    amps = np.array(_amps(v, n), dtype=complex)
    idx = np.arange(1 << n)
    for g in circuit.gates:
        if g.kind == "CNOT":
            c, t = g.qubits
            sel = idx[((idx >> c) & 1) == 1]
            amps[sel] = amps[sel ^ (1 << t)]
            continue
        (q,) = g.qubits
        one = ((idx >> q) & 1) == 1
        if g.kind == "H":
            a0 = amps[~one]
            a1 = amps[one]
            amps[~one] = (a0 + a1) / np.sqrt(2)
            amps[one] = (a0 - a1) / np.sqrt(2)
        elif g.kind == "S":
            amps[one] *= 1j
        elif g.kind == "S_DAG":
            amps[one] *= -1j
        else:
            raise ValueError(f"unknown gate {g.kind}")
    return Statevector(n, amps)


def sample_noisy_measurement(z: PauliSum, phi, F: float, shots: int, seed: int) -> np.ndarray:
    """Outcomes of measuring Ising sum ``z`` on ``F |phi><phi| + (1-F) I/d``.

    Each shot is drawn from ``|phi|^2`` with probability ``F`` and uniformly
    otherwise; the outcome is the eigenvalue of ``z`` on the sampled bitstring.
    """
    if not (0.0 < F <= 1.0):
        raise ValueError(f"fidelity must lie in (0, 1], got {F}")
    diag = ising_diagonal(z)
    amps = _amps(phi, z.n_qubits)
    dim = len(amps)
    rng = np.random.default_rng(seed)
    probs = np.abs(amps) ** 2
    probs /= probs.sum()
    keep = rng.random(shots) < F
    bits = np.empty(shots, dtype=np.int64)
    n_keep = int(keep.sum())
    bits[keep] = rng.choice(dim, size=n_keep, p=probs)
    bits[~keep] = rng.integers(0, dim, size=shots - n_keep)
    return diag[bits]
