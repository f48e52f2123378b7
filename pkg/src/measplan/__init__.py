"""Fidelity-aware measurement planning for Pauli-sum observables."""
from .clifford import (CliffordCircuit, CliffordGate, SynthesisError, Tableau, conjugate_sum,
                       gate_counts, peephole_cleanup, synthesize, synthesize_fc, synthesize_qwc)
from .fermion import (FermionOperator, MolecularIntegrals, bravyi_kitaev, build_second_quantized,
                      jordan_wigner, parse_fcidump, qubit_hamiltonian, read_fcidump)
from .grouping import FragmentSet, sorted_insertion, validate_partition
from .metrics import (PRESETS, FragmentMetrics, MeasurementReport, NoiseParams, analyze_fragment,
                      approx_measurements_p, circuit_fidelity, estimator_variance,
                      estimator_variance_split, preset, total_measurements)
from .pauli import (PauliProduct, PauliSum, commutes, format_pauli, is_ising, multiply, parse_pauli,
                    qubit_wise_commutes, sum_square_coeffs)
from .planner import FragmentPlan, MeasurementPlan, plan_measurements, ratio_table
from .state import (Statevector, apply_clifford, apply_pauli_sum, expectation, expectation_of_square,
                    ground_state, sample_noisy_measurement)

__version__ = "0.1.0"
