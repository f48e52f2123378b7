"""Sampling check of the noisy estimator on one small fragment.

Run from the repository root:  python demos/monte_carlo_check.py
"""
import numpy as np

from measplan import PauliSum, Statevector, apply_clifford, conjugate_sum, parse_pauli, synthesize
from measplan.formats import circuit_text
from measplan.metrics import estimator_variance, fragment_moments
from measplan.pauli import sum_square_coeffs
from measplan.state import sample_noisy_measurement

# XX, YY and ZZ commute with each other but not qubit by qubit, so measuring
# them together needs an entangling circuit.
frag = PauliSum(2, [(0.5, parse_pauli("X0 X1", 2)), (-0.3, parse_pauli("Y0 Y1", 2)),
                    (0.2, parse_pauli("Z0 Z1", 2))])
circuit = synthesize(frag, "FC")
print("circuit:")
print(circuit_text(circuit), end="")

rng = np.random.default_rng(11)
amps = rng.normal(size=4) + 1j * rng.normal(size=4)
psi = Statevector(2, amps / np.linalg.norm(amps))
mean, h2 = fragment_moments(frag, psi)

# Sample the rotated Ising observable on a depolarized copy of the rotated
# state, rescale by 1/F, and compare with the closed-form variance.
F = 0.7
ising = conjugate_sum(circuit, frag)
shots = 200_000
samples = sample_noisy_measurement(ising, apply_clifford(circuit, psi), F, shots, seed=5) / F
predicted = estimator_variance(h2 - mean ** 2, h2, sum_square_coeffs(frag), F)
print(f"<H> exact {mean:+.4f}   sampled {samples.mean():+.4f} +- {np.sqrt(predicted / shots):.4f}")
print(f"variance predicted {predicted:.4f}   sampled {samples.var(ddof=1):.4f}")
