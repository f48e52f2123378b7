"""How FC diagonalization circuits grow with the number of qubits.

Run from the repository root:  python demos/gate_scaling.py
"""
import math
from pathlib import Path

import numpy as np

from measplan import plan_measurements, qubit_hamiltonian, read_fcidump
from measplan.cli import fit_line

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

xs, ys = [], []
for system in ["h2", "lih", "beh2", "h2o", "nh3", "n2"]:
    h = qubit_hamiltonian(read_fcidump(FIXTURES / f"{system}_sto3g.fcidump"), "bk")
    fc = plan_measurements(h, "FC")
    n = h.n_qubits
    g1 = np.mean([f.G1 for f in fc.fragments])
    g2 = np.mean([f.G2 for f in fc.fragments])
    print(f"{system:<5} Nq={n:2d}  fragments={len(fc.fragments):3d}  mean G1={g1:6.1f}  mean G2={g2:6.1f}")
    xs.append(n * n / math.log10(n))
    ys.append(g1 + g2)

# The cost of a generic Clifford circuit is expected to grow like N^2 / log N,
# so a straight line in that variable should fit well.
fit = fit_line(xs, ys)
print(f"gates ~ {fit['slope']:.3f} * Nq^2/log10(Nq) + {fit['intercept']:.1f}   (R^2 = {fit['r2']:.3f})")
