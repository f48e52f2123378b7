"""Regenerate the molecular FCIDUMP fixtures.

Development-only helper: requires PySCF, which the library itself never
imports. Run from the repository root::

    python tools/make_fixtures.py [--basis sto-3g 6-31g]

Each system writes ``fixtures/<system>_<basis>.fcidump`` (canonical RHF
molecular orbitals) and records geometry and reference energies in
``fixtures/manifest.json``.
"""
import argparse
import json
import math
from pathlib import Path

from pyscf import fci, gto, scf
from pyscf.tools import fcidump

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _bent(center, r, angle_deg):
    half = math.radians(angle_deg) / 2
    return (
        f"{center} 0 0 0; "
        f"H {r * math.sin(half):.10f} {r * math.cos(half):.10f} 0; "
        f"H {-r * math.sin(half):.10f} {r * math.cos(half):.10f} 0"
    )


def _pyramid(center, r, angle_deg):
    # polar angle theta of each N-H bond from the -z axis, from
    # cos(HNH) = cos^2(theta) - sin^2(theta) / 2
    c = math.cos(math.radians(angle_deg))
    sin2 = (1 - c) / 1.5
    st, ct = math.sqrt(sin2), math.sqrt(1 - sin2)
    atoms = [f"{center} 0 0 0"]
    for k in range(3):
        phi = 2 * math.pi * k / 3
        atoms.append(f"H {r * st * math.cos(phi):.10f} {r * st * math.sin(phi):.10f} {-r * ct:.10f}")
    return "; ".join(atoms)


SYSTEMS = {
    "h2": ("H 0 0 0; H 0 0 1.0", "R(H-H) = 1.0 A"),
    "lih": ("Li 0 0 0; H 0 0 1.0", "R(Li-H) = 1.0 A"),
    "beh2": ("H 0 0 -1.0; Be 0 0 0; H 0 0 1.0", "R(Be-H) = 1.0 A, linear"),
    "h2o": (_bent("O", 1.0, 107.6), "R(O-H) = 1.0 A, HOH = 107.6 deg"),
    "nh3": (_pyramid("N", 1.0, 107.0), "R(N-H) = 1.0 A, HNH = 107 deg"),
    "n2": ("N 0 0 0; N 0 0 1.0", "R(N-N) = 1.0 A (bond length assumed)"),
}

EXTENDED = {"sto-3g": list(SYSTEMS), "6-31g": ["h2", "lih", "beh2", "h2o", "nh3", "n2"]}


def build(name, basis, manifest, fci_max_orb=12):
    atom, note = SYSTEMS[name]
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom", symmetry=True, verbose=0)
    mf = scf.RHF(mol).run(conv_tol=1e-12)
    tag = f"{name}_{basis.replace('-', '').lower()}"
    path = FIXTURES / f"{tag}.fcidump"
    fcidump.from_scf(mf, str(path), tol=1e-12)
    entry = {
        "system": name,
        "basis": basis,
        "geometry": atom,
        "geometry_note": note,
        "n_orbitals": int(mf.mo_coeff.shape[1]),
        "n_electrons": int(mol.nelectron),
        "n_qubits": 2 * int(mf.mo_coeff.shape[1]),
        "e_hf": float(mf.e_tot),
        "point_group": mol.groupname,
    }
    if entry["n_orbitals"] <= fci_max_orb:
        entry["e_fci"] = float(fci.FCI(mf).kernel()[0])
    manifest[tag] = entry
    print(tag, entry["n_qubits"], entry.get("e_fci", entry["e_hf"]))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--basis", nargs="+", default=["sto-3g", "6-31g"])
    args = ap.parse_args()
    FIXTURES.mkdir(exist_ok=True)
    mpath = FIXTURES / "manifest.json"
    manifest = json.loads(mpath.read_text()) if mpath.exists() else {}
    for basis in args.basis:
        for name in EXTENDED[basis]:
            build(name, basis, manifest)
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
