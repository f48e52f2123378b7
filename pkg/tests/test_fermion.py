import io
import itertools

import numpy as np
import pytest

from measplan.fermion import (FcidumpError, FermionOperator, MolecularIntegrals, _ladder_bk,
                              _ladder_jw, bravyi_kitaev, build_second_quantized, encode,
                              flip_set, jordan_wigner, number_operator_fermion, parity_set,
                              parse_fcidump, qubit_hamiltonian, read_fcidump, remainder_set,
                              update_set)
from measplan.pauli import PauliError, PauliProduct, PauliSum
from conftest import fixture_path
from oracles import X, Y, Z, I2, dense_pauli, dense_sum, fci_energy, kron_qubits

LADDERS = {"jw": _ladder_jw, "bk": _ladder_bk}


def fd(body: str, header: str = "&FCI NORB=1, NELEC=2, MS2=0,\n&END\n") -> MolecularIntegrals:
    return parse_fcidump(io.StringIO(header + body))


def dense_ladder(mapping, j, n, creation):
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for c, x, z in LADDERS[mapping](j, n, creation):
        out += c * dense_pauli(PauliProduct(n, x, z))
    return out


def textbook_jw_annihilator(j, n):
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1| on occupied -> empty
    return kron_qubits([Z] * j + [lower] + [I2] * (n - j - 1))


def random_hermitian_fermion(rng, n):
    terms = []
    for i, j in itertools.product(range(n), repeat=2):
        c = rng.normal()
        terms += [(c, ((i, True), (j, False))), (c, ((j, True), (i, False)))]
    for _ in range(6):
        i, j, k, l = rng.choice(n, 4, replace=True)
        if i == j or k == l:
            continue
        c = rng.normal()
        ops = ((int(i), True), (int(j), True), (int(k), False), (int(l), False))
        terms.append((c, ops))
        terms.append((c, tuple((m, not cr) for m, cr in reversed(ops))))
    return FermionOperator(tuple(terms))


class TestFcidump:
    def test_one_electron(self):
        mi = fd("0.5 1 1 0 0\n")
        assert mi.h1[0, 0] == 0.5 and not mi.h2.any() and mi.e_nuc == 0

    def test_two_electron(self):
        mi = fd("0.25 1 1 1 1\n")
        assert mi.h2[0, 0, 0, 0] == 0.25

    def test_missing_norb(self):
        with pytest.raises(FcidumpError, match="NORB"):
            fd("", header="&FCI NELEC=2,\n&END\n")

    def test_eightfold_symmetry(self):
        mi = fd("0.1 1 2 3 4\n1.5 0 0 0 0\n", header="&FCI NORB=4,NELEC=2,\n&END\n")
        want = {(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
                (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)}
        got = {tuple(int(v) for v in k) for k in zip(*np.nonzero(mi.h2))}
        assert got == want
        assert mi.e_nuc == 1.5

    def test_fortran_exponent_and_slash_terminator(self):
        mi = fd("5.0D-1 1 1 0 0\n", header=" &FCI NORB=1 /\n")
        assert mi.h1[0, 0] == 0.5

    @pytest.mark.parametrize("body,match", [
        ("0.5 1 1 x 0\n", "line 3"),
        ("0.5 3 1 0 0\n", "range"),
        ("0.5 1 1\n", "line 3"),
    ])
    def test_errors_name_the_line(self, body, match):
        with pytest.raises(FcidumpError, match=match):
            fd(body)

    def test_unterminated_header(self):
        with pytest.raises(FcidumpError):
            parse_fcidump(io.StringIO("&FCI NORB=1,\n0.5 1 1 0 0\n"))


class TestSecondQuantized:
    def test_single_orbital_one_body(self):
        mi = fd("0.7 1 1 0 0\n0.3 0 0 0 0\n")
        h = jordan_wigner(build_second_quantized(mi), 2)
        # 0.7 (n0 + n1) + 0.3 = 1.0 I - 0.35 Z0 - 0.35 Z1
        want = {(0, 0): 1.0, (0, 1): -0.35, (0, 2): -0.35}
        got = h.as_dict()
        assert got.keys() == want.keys()
        assert all(abs(got[k] - want[k]) < 1e-14 for k in want)

    def test_zero_integrals_give_constant(self):
        mi = fd("0.0 1 1 0 0\n-2.0 0 0 0 0\n")
        h = qubit_hamiltonian(mi, "bk")
        assert h.as_dict() == {(0, 0): -2.0}

    def test_h2_lowest_eigenvalue_matches_ci_oracle(self, manifest):
        mi = read_fcidump(fixture_path("h2"))
        e_ci = fci_energy(mi)
        assert abs(e_ci - manifest["h2_sto3g"]["e_fci"]) < 1e-10
        for mapping in ("jw", "bk"):
            w = np.linalg.eigvalsh(dense_sum(qubit_hamiltonian(mi, mapping)))
            assert abs(w[0] - e_ci) < 1e-10


class TestJordanWigner:
    def test_number_operators(self):
        n0 = FermionOperator(((1.0, ((0, True), (0, False))),))
        n1 = FermionOperator(((1.0, ((1, True), (1, False))),))
        assert jordan_wigner(n0, 2) == PauliSum.from_strings(2, [(0.5, "I"), (-0.5, "Z0")])
        assert jordan_wigner(n1, 2) == PauliSum.from_strings(2, [(0.5, "I"), (-0.5, "Z1")])

    def test_hopping(self):
        f = FermionOperator(((1.0, ((0, True), (1, False))), (1.0, ((1, True), (0, False)))))
        assert jordan_wigner(f, 2) == PauliSum.from_strings(2, [(0.5, "X0 X1"), (0.5, "Y0 Y1")])

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_ladders_match_textbook_matrices(self, n):
        for j in range(n):
            assert np.allclose(dense_ladder("jw", j, n, False), textbook_jw_annihilator(j, n))
            assert np.allclose(dense_ladder("jw", j, n, True), textbook_jw_annihilator(j, n).conj().T)

    def test_non_hermitian_rejected(self):
        with pytest.raises(PauliError):
            jordan_wigner(FermionOperator(((1.0, ((0, True),)),)), 1)


class TestBravyiKitaev:
    def test_single_mode_equals_jw(self):
        f = FermionOperator(((0.3, ((0, True), (0, False))),))
        assert bravyi_kitaev(f, 1) == jordan_wigner(f, 1)

    @pytest.mark.parametrize("n", [1, 4, 7, 12])
    def test_mode_zero_number_operator(self, n):
        f = FermionOperator(((1.0, ((0, True), (0, False))),))
        assert bravyi_kitaev(f, n) == PauliSum.from_strings(n, [(0.5, "I"), (-0.5, "Z0")])

    def test_fenwick_sets_for_eight_modes(self):
        # standard binary-tree sets for n = 8
        assert update_set(0, 8) == [1, 3, 7]
        assert update_set(2, 8) == [3, 7]
        assert update_set(7, 8) == []
        assert parity_set(6) == [5, 3]
        assert flip_set(7) == [6, 5, 3]
        assert flip_set(3) == [2, 1]
        assert flip_set(6) == []
        assert remainder_set(6) == [5, 3]
        assert remainder_set(5) == [3]

    @pytest.mark.parametrize("seed", range(5))
    def test_random_four_mode_spectrum_matches_jw(self, seed):
        rng = np.random.default_rng(seed)
        f = random_hermitian_fermion(rng, 4)
        a = np.linalg.eigvalsh(dense_sum(jordan_wigner(f, 4)))
        b = np.linalg.eigvalsh(dense_sum(bravyi_kitaev(f, 4)))
        assert np.allclose(a, b, atol=1e-10)


@pytest.mark.parametrize("mapping", ["jw", "bk"])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_anticommutation(mapping, n):
    ann = [dense_ladder(mapping, j, n, False) for j in range(n)]
    for i, j in itertools.product(range(n), repeat=2):
        anti = ann[i] @ ann[j].conj().T + ann[j].conj().T @ ann[i]
        assert np.allclose(anti, np.eye(1 << n) * (i == j))
        assert np.allclose(ann[i] @ ann[j] + ann[j] @ ann[i], 0)
    for j in range(n):
        assert np.allclose(dense_ladder(mapping, j, n, True), ann[j].conj().T)


@pytest.mark.parametrize("mapping", ["jw", "bk"])
def test_majoranas_square_to_one_and_anticommute(mapping):
    n = 5
    maj = []
    for j in range(n):
        maj.append(encode(FermionOperator(((1.0, ((j, True),)), (1.0, ((j, False),)))), n, mapping))
        maj.append(encode(FermionOperator(((1j, ((j, True),)), (-1j, ((j, False),)))), n, mapping))
    dense = [dense_sum(m) for m in maj]
    for a, b in itertools.combinations_with_replacement(range(2 * n), 2):
        anti = dense[a] @ dense[b] + dense[b] @ dense[a]
        assert np.allclose(anti, 2 * np.eye(1 << n) * (a == b))


@pytest.mark.parametrize("mapping", ["jw", "bk"])
def test_number_operator_has_integer_spectrum(mapping):
    n = 5
    w = np.linalg.eigvalsh(dense_sum(encode(number_operator_fermion(n), n, mapping)))
    assert np.allclose(w, np.round(w), atol=1e-10)
    assert set(np.round(w).astype(int)) == set(range(n + 1))


@pytest.mark.parametrize("n", [3, 5])
def test_spectrum_equivalence_random_five_modes(n):
    rng = np.random.default_rng(n)
    f = random_hermitian_fermion(rng, n)
    a = np.linalg.eigvalsh(dense_sum(jordan_wigner(f, n)))
    b = np.linalg.eigvalsh(dense_sum(bravyi_kitaev(f, n)))
    assert np.allclose(a, b, atol=1e-10)


# Term counts of the shipped STO-3G fixtures under BK, frozen from the encoder.
BK_TERMS = {"h2": 15, "lih": 631, "beh2": 666, "h2o": 1086, "nh3": 2865, "n2": 2239}


@pytest.mark.parametrize("system", sorted(BK_TERMS))
def test_fixture_term_counts(system, manifest):
    mi = read_fcidump(fixture_path(system))
    assert 2 * mi.n_orbitals == manifest[f"{system}_sto3g"]["n_qubits"]
    assert len(qubit_hamiltonian(mi, "bk")) == BK_TERMS[system]
