"""Acceptance criteria 1-9.

Each test records one PASS/FAIL line (shown in the terminal summary) with the
numbers behind the verdict. Tolerances are the stated ones; nothing is relaxed.
Set ``MEASPLAN_EXTENDED=1`` to include the 20-qubit N2 system where a
criterion lists it as optional.
"""
import itertools
import math
import os
from functools import lru_cache

import numpy as np
import pytest

from measplan.clifford import conjugate_sum, gate_counts, synthesize
from measplan.cli import fit_line
from measplan.fermion import MolecularIntegrals, qubit_hamiltonian, read_fcidump
from measplan.grouping import sorted_insertion, validate_partition
from measplan.metrics import (PRESETS, NoiseParams, approx_measurements_p, estimator_variance,
                              fragment_moments, total_measurements)
from measplan.pauli import PauliSum, commutes, sum_square_coeffs
from measplan.planner import evaluate, plan_measurements, ratio_table, state_moments
from measplan.state import Statevector, apply_clifford, ground_state, sample_noisy_measurement
from conftest import STO3G, fixture_path, record_criterion
from oracles import dense_circuit, dense_sum, depolarized
from strategies import random_commuting_fragment, random_qwc_fragment, random_state

EXTENDED = os.environ.get("MEASPLAN_EXTENDED") == "1"
SYSTEMS = STO3G + (["n2"] if EXTENDED else [])
ALL_FIXTURES = STO3G + ["n2"]

# QWC/FC ideal ratios at p = 1 from the reference table, with the stated tolerances
TABLE_IDEAL = {"h2": (1.00, 0.10), "lih": (1.08, 0.10), "beh2": (5.51, 0.25),
               "h2o": (3.24, 0.25), "nh3": (5.30, 0.25)}


@lru_cache(maxsize=None)
def hamiltonian(system, mapping="bk"):
    return qubit_hamiltonian(read_fcidump(fixture_path(system)), mapping)


@lru_cache(maxsize=None)
def plans(system):
    h = hamiltonian(system)
    return plan_measurements(h, "QWC"), plan_measurements(h, "FC")


@lru_cache(maxsize=None)
def ground(system, mapping="bk"):
    return ground_state(hamiltonian(system, mapping))


def dense_path_variance(fragment, circuit, psi, F):
    u = dense_circuit(circuit)
    z = u @ dense_sum(fragment) @ u.conj().T
    rho = depolarized(u @ psi, F)
    return (np.trace(z @ z @ rho).real - np.trace(z @ rho).real ** 2) / F ** 2


def test_criterion_1_formula_matches_dense_mixed_state():
    rng = np.random.default_rng(1)
    worst = 0.0
    for k in range(200):
        n = int(rng.integers(1, 5))
        frag = (random_commuting_fragment(rng, n, int(rng.integers(1, 2 * n + 1))) if k % 2 else
                random_qwc_fragment(rng, n, int(rng.integers(1, 6))))
        circ = synthesize(frag, "FC" if k % 2 else "QWC")
        psi = random_state(rng, n)
        F = float(rng.uniform(0.3, 1.0))
        mean, h2 = fragment_moments(frag, psi)
        formula = estimator_variance(max(h2 - mean * mean, 0.0), h2, sum_square_coeffs(frag), F)
        worst = max(worst, abs(formula - dense_path_variance(frag, circ, psi, F)))
    ok = worst <= 1e-10
    record_criterion(1, ok, f"200 fragments on <=4 qubits, max |formula - dense| = {worst:.2e} (tol 1e-10)")
    assert ok


def test_criterion_2_monte_carlo_unbiased_and_variance():
    rng = np.random.default_rng(2)
    shots = 1_000_000
    z_means, z_vars = [], []
    for k in range(20):
        frag = random_commuting_fragment(rng, 3, int(rng.integers(2, 6)))
        circ = synthesize(frag, "FC")
        psi = Statevector(3, random_state(rng, 3))
        F = float(rng.uniform(0.3, 1.0))
        ising = conjugate_sum(circ, frag)
        out = sample_noisy_measurement(ising, apply_clifford(circ, psi), F, shots, seed=1000 + k) / F
        mean, h2 = fragment_moments(frag, psi)
        var_bar = estimator_variance(max(h2 - mean * mean, 0.0), h2, sum_square_coeffs(frag), F)
        emp_mean, emp_var = out.mean(), out.var(ddof=1)
        se_mean = math.sqrt(var_bar / shots)
        se_var = math.sqrt(max(((out - emp_mean) ** 4).mean() - emp_var ** 2, 0.0) / shots)
        z_means.append((emp_mean - mean) / se_mean)
        z_vars.append((emp_var - var_bar) / se_var)
    zm, zv = max(map(abs, z_means)), max(map(abs, z_vars))
    ok = zm < 3 and zv < 3
    record_criterion(2, ok, f"20 fragments x 1e6 shots, max |z| mean {zm:.2f}, variance {zv:.2f} (bound 3)")
    assert ok


def test_criterion_3_diagonalization():
    problems = []
    n_circuits = n_dense = 0
    for system in ALL_FIXTURES:
        for plan in plans(system):
            for fp in plan.fragments:
                n_circuits += 1
                if not fp.ising.is_ising():
                    problems.append(f"{system} {plan.mode} fragment {fp.index} not Ising")
                if plan.mode == "QWC" and fp.G2:
                    problems.append(f"{system} QWC fragment {fp.index} has G2={fp.G2}")
    # dense checks: the 4-qubit fixture in full, plus random fragments on <=6 qubits
    qwc, fc = plans("h2")
    cases = [(fp.terms, fp.circuit) for plan in (qwc, fc) for fp in plan.fragments]
    rng = np.random.default_rng(3)
    for k in range(60):
        n = int(rng.integers(2, 7))
        frag = random_commuting_fragment(rng, n, int(rng.integers(2, 2 * n + 2)))
        cases.append((frag, synthesize(frag, "FC")))
        qf = random_qwc_fragment(rng, n, 6)
        cases.append((qf, synthesize(qf, "QWC")))
    worst = 0.0
    for frag, circ in cases:
        u = dense_circuit(circ)
        diff = np.abs(u @ dense_sum(frag) @ u.conj().T - dense_sum(conjugate_sum(circ, frag))).max()
        worst = max(worst, diff)
        n_dense += 1
        if not conjugate_sum(circ, frag).is_ising():
            problems.append("random fragment not Ising")
    ok = not problems and worst <= 1e-10
    record_criterion(3, ok, f"{n_circuits} fixture circuits Ising, {n_dense} dense checks max diff "
                            f"{worst:.1e}, QWC G2=0" + (f"; {problems[:3]}" if problems else ""))
    assert ok


def test_criterion_4_grouping_invariants():
    problems, summary = [], []
    for system in ALL_FIXTURES:
        h = hamiltonian(system)
        rest = h.split_identity()[1]
        counts = {}
        for mode in ("QWC", "FC"):
            fs = sorted_insertion(h, mode)
            rep = validate_partition(fs, h)
            if not rep.ok:
                problems.append(f"{system} {mode}: {rep.violations[:2]}")
            diff = abs(sum(sum_square_coeffs(f) for f in fs.fragments) - sum_square_coeffs(rest))
            if diff > 1e-10:
                problems.append(f"{system} {mode}: sum of squares off by {diff:.1e}")
            counts[mode] = fs.n_fragments
        if counts["QWC"] < counts["FC"]:
            problems.append(f"{system}: N_f(QWC) < N_f(FC)")
        summary.append(f"{system} {counts['QWC']}/{counts['FC']}")
    ok = not problems
    record_criterion(4, ok, "N_f QWC/FC: " + ", ".join(summary) + (f"; {problems}" if problems else ""))
    assert ok


def test_criterion_5_ratio_table():
    checks, lines = [], []
    rows_by_system = {}
    for system in SYSTEMS:
        qwc, fc = plans(system)
        _, v = ground(system)
        rows = ratio_table(qwc, fc, v, p_values=(1.0,))
        r = {row["preset"]: row["ratio"] for row in rows}
        rows_by_system[system] = r
        lines.append(f"{system} I={r['ideal']:.3f} F={r['F']:.3f} C={r['C']:.3f}")
        if system in TABLE_IDEAL:
            ref, tol = TABLE_IDEAL[system]
            rel = abs(r["ideal"] / ref - 1)
            checks.append((f"{system} ideal {r['ideal']:.3f} vs {ref} (+-{tol:.0%})", rel <= tol))
        if system != "h2":
            checks.append((f"{system} ideal > 1", r["ideal"] > 1))
        lo, hi = sorted((r["C"], r["ideal"]))
        checks.append((f"{system} F between C and ideal", lo - 1e-12 <= r["F"] <= hi + 1e-12))
    checks.append((f"lih C ratio {rows_by_system['lih']['C']:.3f} < 1", rows_by_system["lih"]["C"] < 1))
    failed = [name for name, ok in checks if not ok]
    ok = not failed
    record_criterion(5, ok, "; ".join(lines) + (f" | failed: {failed}" if failed else ""))
    assert ok, failed


def test_criterion_6_gate_scaling():
    by_n = {}
    for system in ALL_FIXTURES:
        _, fc = plans(system)
        by_n.setdefault(fc.fragments[0].terms.n_qubits, []).append(fc.mean_gates())
    ns = sorted(by_n)
    xs = [n * n / math.log10(n) for n in ns]
    ys = [float(np.mean(by_n[n])) for n in ns]
    fit = fit_line(xs, ys)
    ok = len(ns) >= 5 and fit["r2"] >= 0.95 and fit["slope"] > 0
    record_criterion(6, ok, f"{len(ns)} sizes {ns}, slope {fit['slope']:.3f}, intercept "
                            f"{fit['intercept']:.1f}, R^2 {fit['r2']:.4f} (need >= 0.95)")
    assert ok


def test_criterion_7_p_dominated_approximation():
    worst, lines = 0.0, []
    noise = NoiseParams(1.0, 1.0, 0.1)
    for system in STO3G:
        _, v = ground(system)
        for plan in plans(system):
            full = evaluate(plan, state_moments(plan, v), noise).n_m
            approx = approx_measurements_p([fp.terms for fp in plan.fragments], 0.1, 1e-3)
            rel = abs(approx / full - 1)
            worst = max(worst, rel)
            lines.append(f"{system}-{plan.mode} {rel:.1%}")
    ok = worst <= 0.20
    record_criterion(7, ok, f"max relative gap {worst:.1%} (tol 20%): " + ", ".join(lines))
    assert ok


def _truncate(mi: MolecularIntegrals, n: int) -> MolecularIntegrals:
    return MolecularIntegrals(n, mi.e_nuc, mi.h1[:n, :n].copy(), mi.h2[:n, :n, :n, :n].copy(),
                              mi.n_electrons, mi.ms2)


def test_criterion_8_encoding_equivalence():
    worst_dense = worst_ground = 0.0
    for system in SYSTEMS:
        mi = read_fcidump(fixture_path(system))
        # dense spectra on a 2-orbital (4-mode) cut of every fixture
        sub = _truncate(mi, 2)
        a = np.linalg.eigvalsh(dense_sum(qubit_hamiltonian(sub, "jw")))
        b = np.linalg.eigvalsh(dense_sum(qubit_hamiltonian(sub, "bk")))
        worst_dense = max(worst_dense, float(np.abs(a - b).max()))
        e_jw, _ = ground(system, "jw")
        e_bk, _ = ground(system, "bk")
        worst_ground = max(worst_ground, abs(e_jw - e_bk))
    ok = worst_dense <= 1e-8 and worst_ground <= 1e-8
    record_criterion(8, ok, f"{len(SYSTEMS)} fixtures, max spectrum gap (4 modes) {worst_dense:.1e}, "
                            f"max ground-energy gap {worst_ground:.1e} (tol 1e-8)")
    assert ok


def _n_m(var_list):
    return total_measurements(var_list, 1e-3)[0]


def test_criterion_9_merging_never_increases():
    violations, merges = [], 0
    # fixtures: split every multi-term FC fragment in two and compare with the whole
    for system in ("h2", "lih", "beh2", "h2o"):
        _, fc = plans(system)
        _, v = ground(system)
        var = []
        for fp in fc.fragments:
            m, h2 = fragment_moments(fp.terms, v)
            var.append(max(h2 - m * m, 0.0))
        base = _n_m(var)
        for k, fp in enumerate(fc.fragments):
            if len(fp.terms) < 2:
                continue
            terms = fp.terms.terms
            parts = [PauliSum(fp.terms.n_qubits, terms[::2]), PauliSum(fp.terms.n_qubits, terms[1::2])]
            pv = []
            for part in parts:
                m, h2 = fragment_moments(part, v)
                pv.append(max(h2 - m * m, 0.0))
            split = _n_m(var[:k] + pv + var[k + 1:])
            merges += 1
            if base > split * (1 + 1e-12):
                violations.append(f"{system} fragment {k}")
    # random Hamiltonians: merge every FC-compatible pair of SI fragments
    rng = np.random.default_rng(9)
    from strategies import random_sum
    for _ in range(30):
        h = random_sum(rng, 4, 14)
        fs = sorted_insertion(h, "FC")
        v = random_state(rng, 4)
        var = [max(b - a * a, 0.0) for a, b in (fragment_moments(f, v) for f in fs.fragments)]
        base = _n_m(var)
        for i, j in itertools.combinations(range(fs.n_fragments), 2):
            union = fs.fragments[i] + fs.fragments[j]
            if not all(commutes(p, q) for p, q in itertools.combinations(union.products, 2)):
                continue
            merged = fs.merged(i, j)
            mv = [max(b - a * a, 0.0) for a, b in (fragment_moments(f, v) for f in merged.fragments)]
            merges += 1
            if _n_m(mv) > base * (1 + 1e-12):
                violations.append("random merge")
    ok = not violations and merges > 0
    record_criterion(9, ok, f"{merges} merges checked, {len(violations)} increased N_m")
    assert ok
