"""Estimator variance and measurement counts under a depolarizing fidelity model.

Measuring fragment ``H_n`` after a preparation of total fidelity ``F_n`` is
modelled as sampling ``Z_n`` on ``F_n |Phi_n><Phi_n| + (1 - F_n) I/d``. The
rescaled estimator ``Tr[Z_n rho_n] / F_n`` is unbiased and has variance

    Var_psi(H_n) + (1 - F)/F <H_n^2> + (1 - F)/F^2 sum_j a_j^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from . import state as st
from .clifford import CliffordCircuit, SynthesisError, conjugate_sum, gate_counts
from .grouping import FragmentSet
from .pauli import PauliSum, product_phase, sum_square_coeffs


@dataclass(frozen=True)
class NoiseParams:
    f1: float = 1.0
    f2: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        for name in ("f1", "f2", "p"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {v}")

    def with_p(self, p: float) -> "NoiseParams":
        return NoiseParams(self.f1, self.f2, p)


# gate-fidelity presets: ideal, contemporary superconducting device, near future
PRESETS = {
    "ideal": (1.0, 1.0),
    "C": (0.9938, 0.9984),
    "F": (0.9999, 0.999),
}
DEFAULT_P_VALUES = (1.0, 0.8, 0.6)


def preset(name: str, p: float = 1.0) -> NoiseParams:
    key = name if name in PRESETS else {"i": "ideal", "c": "C", "f": "F"}.get(name.lower(), name)
    if key not in PRESETS:
        raise ValueError(f"unknown fidelity preset {name!r}; choose ideal, C or F")
    f1, f2 = PRESETS[key]
    return NoiseParams(f1, f2, p)


def circuit_fidelity(g1: int, g2: int, noise: NoiseParams) -> float:
    return noise.f1 ** g1 * noise.f2 ** g2


def estimator_variance(var_psi: float, h2_exp: float, ssc: float, F: float) -> float:
    if not (0.0 < F <= 1.0):
        raise ValueError(f"fidelity must lie in (0, 1], got {F}")
    return var_psi + (1.0 - F) / F * h2_exp + (1.0 - F) / F ** 2 * ssc


def off_diagonal_square(fragment: PauliSum, v) -> float:
    """``sum_{i != j} a_i a_j <P_i P_j>`` by explicit pairwise products."""
    terms = fragment.terms
    total = 0.0
    for i, (ci, pi) in enumerate(terms):
        for cj, pj in terms[i + 1:]:
            k = product_phase(pi.x, pi.z, pj.x, pj.z)
            if k % 2:
                continue  # anticommuting pair: P_i P_j + P_j P_i = 0
            prod = PauliSum.from_dict(fragment.n_qubits, {(pi.x ^ pj.x, pi.z ^ pj.z): (1j ** k)})
            total += 2.0 * ci * cj * st.expectation(prod, v)
    return total


def estimator_variance_split(fragment: PauliSum, v, F: float, pairwise: bool = False):
    """``(diagonal part, off-diagonal part, Var_psi)`` of the estimator variance.

    The diagonal part is ``(1-F)(1/F + 1/F^2) sum_j a_j^2`` and the
    off-diagonal part ``(1-F)/F sum_{i != j} a_i a_j <P_i P_j>``.
    """
    if not (0.0 < F <= 1.0):
        raise ValueError(f"fidelity must lie in (0, 1], got {F}")
    ssc = sum_square_coeffs(fragment)
    var_psi = st.variance(fragment, v)
    if pairwise:
        off = off_diagonal_square(fragment, v)
    else:
        off = st.expectation_of_square(fragment, v) - ssc
    diag_part = (1.0 - F) * (1.0 / F + 1.0 / F ** 2) * ssc
    off_part = (1.0 - F) / F * off
    return diag_part, off_part, var_psi


def total_measurements(var_bars: Sequence[float], epsilon: float):
    """``(N_m, shares)`` under the optimal allocation ``N_n ~ sqrt(Var_n)``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    roots = np.sqrt(np.clip(np.asarray(var_bars, dtype=float), 0.0, None))
    total = roots.sum()
    n_m = float((total / epsilon) ** 2)
    shares = roots / total if total > 0 else np.zeros_like(roots)
    return n_m, shares


def approx_measurements_p(fragments: FragmentSet | Sequence[PauliSum], p: float, epsilon: float) -> float:
    """Measurement count when the uniform factor ``p`` dominates the fidelity."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not (0.0 < p <= 1.0):
        raise ValueError(f"p must lie in (0, 1], got {p}")
    frags = fragments.fragments if isinstance(fragments, FragmentSet) else fragments
    s = sum(math.sqrt(sum_square_coeffs(f)) for f in frags)
    return (1.0 - p) / (epsilon ** 2 * p ** 2) * s ** 2


@dataclass
class FragmentMetrics:
    q_n: float
    F_n: float
    var_psi: float
    h2_exp: float
    ssc: float
    var_bar: float
    G1: int
    G2: int
    mean: float = 0.0


def analyze_fragment(fragment: PauliSum, circuit: CliffordCircuit, v, noise: NoiseParams,
                     y_cost: int = 2) -> FragmentMetrics:
    if not conjugate_sum(circuit, fragment).is_ising():
        raise SynthesisError("circuit does not diagonalize the fragment")
    g1, g2 = gate_counts(circuit, y_cost)
    return metrics_from_moments(fragment, *fragment_moments(fragment, v), g1, g2, noise)


def fragment_moments(fragment: PauliSum, v) -> tuple[float, float]:
    """``(<H_n>, <H_n^2>)`` on state ``v``."""
    hv = st.apply_pauli_sum(fragment, v)
    amps = v.amplitudes if isinstance(v, st.Statevector) else np.asarray(v)
    return float(np.vdot(amps, hv).real), float(np.vdot(hv, hv).real)


def metrics_from_moments(fragment: PauliSum, mean: float, h2_exp: float, g1: int, g2: int,
                         noise: NoiseParams) -> FragmentMetrics:
    q = circuit_fidelity(g1, g2, noise)
    F = noise.p * q
    var_psi = max(h2_exp - mean * mean, 0.0)
    ssc = sum_square_coeffs(fragment)
    return FragmentMetrics(q, F, var_psi, h2_exp, ssc,
                           estimator_variance(var_psi, h2_exp, ssc, F), g1, g2, mean)


@dataclass
class MeasurementReport:
    mode: str
    noise: NoiseParams
    epsilon: float
    fragments: list[FragmentMetrics]
    n_m: float
    n_m_approx_p: float
    shares: list[float] = field(default_factory=list)
    approx_defined: bool = True
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_fragments"] = len(self.fragments)
        return d


def build_report(mode: str, fragments: Sequence[FragmentMetrics], noise: NoiseParams,
                 epsilon: float, square_sums: Sequence[float], meta: dict | None = None) -> MeasurementReport:
    n_m, shares = total_measurements([m.var_bar for m in fragments], epsilon)
    s = sum(math.sqrt(x) for x in square_sums)
    approx = (1.0 - noise.p) / (epsilon ** 2 * noise.p ** 2) * s ** 2
    return MeasurementReport(mode, noise, epsilon, list(fragments), n_m, approx,
                             [float(x) for x in shares], noise.p < 1.0, dict(meta or {}))
