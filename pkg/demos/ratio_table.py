"""QWC versus FC measurement counts on the bundled molecules.

Run from the repository root:  python demos/ratio_table.py
Takes about half a minute (NH3 is the slow one).
"""
from pathlib import Path

from measplan import plan_measurements, qubit_hamiltonian, ratio_table, read_fcidump
from measplan.state import ground_state

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# Every molecule follows the same path: integrals -> BK qubit Hamiltonian ->
# the two groupings -> exact ground state -> counts under each fidelity preset.
print(f"{'system':<6} {'Nq':>3} {'Nf QWC':>7} {'Nf FC':>6}   ideal     F(p=1)   C(p=1)   F(p=0.8)")
for system in ["h2", "lih", "beh2", "h2o", "nh3"]:
    h = qubit_hamiltonian(read_fcidump(FIXTURES / f"{system}_sto3g.fcidump"), "bk")
    qwc, fc = plan_measurements(h, "QWC"), plan_measurements(h, "FC")
    energy, psi = ground_state(h)
    rows = ratio_table(qwc, fc, psi, p_values=(1.0, 0.8))
    r = {(row["preset"], row["p"]): row["ratio"] for row in rows}
    print(f"{system:<6} {h.n_qubits:>3} {len(qwc.fragments):>7} {len(fc.fragments):>6}   "
          f"{r['ideal', 1.0]:6.3f}   {r['F', 1.0]:6.3f}   {r['C', 1.0]:6.3f}   {r['F', 0.8]:6.3f}")

# Two things to notice. With perfect gates FC always wins by a wide margin,
# because it needs far fewer fragments. Once the gates are noisy, the long FC
# circuits lose fidelity and eat into that advantage. Lowering p adds noise
# that hits every fragment equally. The sum-of-squares term then takes over,
# and the ratio heads toward (sum_n sqrt(sum_j a_j^2)) squared, taken QWC over FC.
