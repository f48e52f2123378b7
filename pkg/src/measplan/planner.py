"""End-to-end measurement planning: group, synthesize, evaluate."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .clifford import CliffordCircuit, SynthesisError, conjugate_sum, gate_counts, synthesize
from .grouping import FragmentSet, sorted_insertion
from .metrics import (DEFAULT_P_VALUES, PRESETS, MeasurementReport, NoiseParams, build_report,
                      fragment_moments, metrics_from_moments)
from .pauli import PauliSum, sum_square_coeffs


@dataclass(frozen=True)
class FragmentPlan:
    index: int
    terms: PauliSum
    circuit: CliffordCircuit
    ising: PauliSum
    G1: int
    G2: int

    @property
    def n_gates(self) -> int:
        return self.G1 + self.G2


@dataclass(frozen=True)
class MeasurementPlan:
    mode: str
    fragment_set: FragmentSet
    fragments: tuple[FragmentPlan, ...]
    y_cost: int = 2

    @property
    def constant(self) -> float:
        return self.fragment_set.constant

    def mean_gates(self) -> float:
        return float(np.mean([f.n_gates for f in self.fragments])) if self.fragments else 0.0


def plan_measurements(h: PauliSum, mode: str, y_cost: int = 2) -> MeasurementPlan:
    """Sorted Insertion grouping plus one verified diagonalizing circuit per fragment."""
    fs = sorted_insertion(h, mode)
    plans = []
    for k, frag in enumerate(fs.fragments):
        circ = synthesize(frag, fs.mode)
        ising = conjugate_sum(circ, frag)
        if not ising.is_ising():
            raise SynthesisError(f"fragment {k} was not diagonalized")
        g1, g2 = gate_counts(circ, y_cost)
        plans.append(FragmentPlan(k, frag, circ, ising, g1, g2))
    return MeasurementPlan(fs.mode, fs, tuple(plans), y_cost)


def state_moments(plan: MeasurementPlan, v) -> list[tuple[float, float]]:
    """``(<H_n>, <H_n^2>)`` per fragment; reusable across noise settings."""
    return [fragment_moments(f.terms, v) for f in plan.fragments]


def evaluate(plan: MeasurementPlan, moments: Sequence[tuple[float, float]], noise: NoiseParams,
             epsilon: float = 1e-3, meta: dict | None = None) -> MeasurementReport:
    metrics = [metrics_from_moments(f.terms, mean, h2, f.G1, f.G2, noise)
               for f, (mean, h2) in zip(plan.fragments, moments)]
    squares = [sum_square_coeffs(f.terms) for f in plan.fragments]
    return build_report(plan.mode, metrics, noise, epsilon, squares, meta)


def ratio_table(qwc: MeasurementPlan, fc: MeasurementPlan, v, *,
                presets: Iterable[str] = ("C", "F", "ideal"),
                p_values: Iterable[float] = DEFAULT_P_VALUES,
                epsilon: float = 1e-3) -> list[dict]:
    """``N_m(QWC) / N_m(FC)`` for every (preset, p) pair."""
    mq, mf = state_moments(qwc, v), state_moments(fc, v)
    rows = []
    for p in p_values:
        for name in presets:
            if name == "ideal" and p != 1.0:
                continue
            f1, f2 = PRESETS[name]
            noise = NoiseParams(f1, f2, p)
            rq = evaluate(qwc, mq, noise, epsilon)
            rf = evaluate(fc, mf, noise, epsilon)
            rows.append({
                "preset": name, "p": p,
                "n_m_qwc": rq.n_m, "n_m_fc": rf.n_m,
                "ratio": rq.n_m / rf.n_m if rf.n_m > 0 else math.nan,
                "n_f_qwc": len(qwc.fragments), "n_f_fc": len(fc.fragments),
            })
    return rows
