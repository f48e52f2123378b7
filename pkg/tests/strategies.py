"""Hypothesis strategies and random generators shared by the tests."""
import numpy as np
from hypothesis import strategies as st

from measplan.pauli import PauliProduct, PauliSum


def products(n_qubits: int):
    full = (1 << n_qubits) - 1
    return st.builds(lambda x, z: PauliProduct(n_qubits, x, z),
                     st.integers(0, full), st.integers(0, full))


def pauli_sums(n_qubits: int, max_terms: int = 8):
    coeff = st.floats(-2, 2, allow_nan=False).filter(lambda c: abs(c) > 1e-6)
    return st.lists(st.tuples(coeff, products(n_qubits)), min_size=1, max_size=max_terms).map(
        lambda terms: PauliSum(n_qubits, terms))


def random_sum(rng, n_qubits: int, n_terms: int) -> PauliSum:
    full = 1 << n_qubits
    terms = [(rng.normal(), PauliProduct(n_qubits, int(rng.integers(full)), int(rng.integers(full))))
             for _ in range(n_terms)]
    return PauliSum(n_qubits, terms)


def random_state(rng, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


def random_real_state(rng, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=1 << n_qubits)
    return (v / np.linalg.norm(v)).astype(complex)


def random_commuting_fragment(rng, n_qubits: int, n_terms: int, max_gates: int = 40) -> PauliSum:
    """Random Z products conjugated by a random Clifford: pairwise commuting."""
    from measplan.clifford import conjugate_sum, random_circuit

    full = 1 << n_qubits
    zs = {int(rng.integers(1, full)) for _ in range(n_terms)}
    base = PauliSum(n_qubits, [(rng.normal(), PauliProduct(n_qubits, 0, z)) for z in sorted(zs)])
    circ = random_circuit(n_qubits, int(rng.integers(1, max_gates)), rng)
    return conjugate_sum(circ.inverse(), base)


def random_qwc_fragment(rng, n_qubits: int, n_terms: int) -> PauliSum:
    basis = rng.integers(1, 4, size=n_qubits)  # per-qubit letter: 1 X, 2 Z, 3 Y
    terms = []
    for _ in range(n_terms):
        x = z = 0
        for q in range(n_qubits):
            if rng.random() < 0.6:
                b = basis[q]
                x |= (b & 1) << q
                z |= ((b >> 1) & 1) << q
        if x or z:
            terms.append((rng.normal(), PauliProduct(n_qubits, x, z)))
    if not terms:
        terms = [(1.0, PauliProduct(n_qubits, 0, 1))]
    return PauliSum(n_qubits, terms)
