from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from tnqpde.hamiltonian import PauliTerm, QubitHamiltonian, hubbard_1d, pauli_matrix
from tnqpde.mpo import (
    MatrixProductOperator,
    hamiltonian_to_mpo,
    identity_mpo,
    mpo_from_dense,
    mpo_multiply,
    mpo_to_dense,
    pauli_string_evolution_mpo,
    pauli_string_mpo,
    trotterized_reference,
)

P = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}


def random_mpo(n, chi, seed):
    rng = np.random.default_rng(seed)
    dims = [1] + [chi] * (n - 1) + [1]
    return MatrixProductOperator([rng.standard_normal((2, 2, dims[k], dims[k + 1]))
                                  + 1j * rng.standard_normal((2, 2, dims[k], dims[k + 1])) for k in range(n)])


@pytest.mark.parametrize("n", [1, 3, 6])
def test_identity(n):
    m = identity_mpo(n)
    assert np.array_equal(m.to_dense(), np.eye(2**n))
    assert m.trace() == 2**n
    assert m.bond_dims == [1] * (n - 1)


def test_identity_multiply():
    w = random_mpo(4, 3, 0)
    assert np.max(np.abs(mpo_multiply(identity_mpo(4), w).to_dense() - w.to_dense())) < 1e-12


def test_multiply_x_x():
    x = pauli_string_mpo(PauliTerm(1.0, "X"))
    assert np.allclose(mpo_multiply(x, x).to_dense(), np.eye(2))


def test_multiply_exact_vs_dense():
    a, b = random_mpo(5, 2, 1), random_mpo(5, 3, 2)
    ab = mpo_multiply(a, b, cutoff=0.0)
    ref = a.to_dense() @ b.to_dense()
    assert np.max(np.abs(ab.to_dense() - ref)) < 1e-10 * np.abs(ref).max()


def test_unitary_product_with_dagger():
    u = mpo_from_dense(expm(-0.3j * hubbard_1d(2).to_dense()), 4)
    assert np.max(np.abs(mpo_multiply(u, u.dagger()).to_dense() - np.eye(16))) < 1e-8


def test_pauli_string_kron_oracle():
    t = PauliTerm(0.7, "XIZY")
    ref = 0.7 * reduce(np.kron, [P[c] for c in t.string])
    assert np.allclose(pauli_string_mpo(t).to_dense(), ref)


def test_evolution_single_z():
    m = pauli_string_evolution_mpo(PauliTerm(0.4, "Z"), 0.5)
    assert np.allclose(m.to_dense(), np.diag([np.exp(0.2j), np.exp(-0.2j)]))


def test_evolution_identity_term():
    m = pauli_string_evolution_mpo(PauliTerm(0.4, "III"), 0.5)
    assert np.allclose(m.to_dense(), np.exp(0.2j) * np.eye(8))


def test_evolution_long_string():
    t = PauliTerm(0.37, "IZIIXY")
    m = pauli_string_evolution_mpo(t, 0.005)
    ref = expm(1j * 0.37 * 0.005 * pauli_matrix(t.string))
    assert np.max(np.abs(m.to_dense() - ref)) < 1e-10
    # untouched site before the support is a bond-1 identity
    assert m.tensors[0].shape[2:] == (1, 1) and m.bond_dims[0] == 1


@given(st.text(alphabet="IXYZ", min_size=1, max_size=6), st.floats(-2, 2), st.floats(-0.1, 0.1))
@settings(max_examples=30, deadline=None)
def test_evolution_property(label, c, dtau):
    t = PauliTerm(c, label)
    ref = expm(1j * c * dtau * pauli_matrix(label))
    assert np.max(np.abs(pauli_string_evolution_mpo(t, dtau).to_dense() - ref)) < 1e-10


def test_hamiltonian_to_mpo_examples():
    z0 = hamiltonian_to_mpo(QubitHamiltonian(2, [PauliTerm(1.0, "ZI")]))
    assert np.allclose(z0.to_dense(), np.diag([1, 1, -1, -1]))
    empty = hamiltonian_to_mpo(QubitHamiltonian(3, []))
    assert np.allclose(empty.to_dense(), 0)


def test_hamiltonian_to_mpo_hubbard():
    h = hubbard_1d(4)
    assert np.max(np.abs(hamiltonian_to_mpo(h).to_dense() - h.to_dense())) < 1e-10


def test_mpo_dense_roundtrip_and_guard():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((2**6, 2**6)) + 1j * rng.standard_normal((2**6, 2**6))
    assert np.max(np.abs(mpo_from_dense(a, 6).to_dense() - a)) < 1e-10
    with pytest.raises(ValueError):
        mpo_to_dense(identity_mpo(15))


def test_reference_single_term_exact():
    h = QubitHamiltonian(2, [PauliTerm(0.8, "ZI")])
    u = trotterized_reference(h, 0.1)
    assert np.max(np.abs(u.to_dense() - expm(-0.1j * h.to_dense()))) < 1e-10


def test_reference_two_qubit_toy():
    h = QubitHamiltonian(2, [PauliTerm(1.0, "XX"), PauliTerm(1.0, "YY"), PauliTerm(0.5, "ZZ")])
    u = trotterized_reference(h, 0.1)
    assert np.max(np.abs(u.to_dense() - expm(-0.1j * h.to_dense()))) < 1e-8


def test_reference_empty_is_identity():
    assert np.allclose(trotterized_reference(QubitHamiltonian(3, []), 0.1).to_dense(), np.eye(8))


def test_reference_second_order_scaling():
    h = hubbard_1d(2)
    exact = expm(-0.1j * h.to_dense())
    errs = [np.linalg.norm(trotterized_reference(h, 0.1, s, cutoff=1e-30).to_dense() - exact) for s in (5, 10)]
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_reference_unitarity_8_qubits(uref8):
    u = uref8.to_dense()
    assert np.linalg.norm(u.conj().T @ u - np.eye(256)) / 16 < 1e-5


def test_reference_default_accuracy_8_qubits(uref8):
    """Dense distance at default settings; the 100-slice Trotter floor here is ~1.008e-6."""
    h = hubbard_1d(4)
    dist = np.linalg.norm(uref8.to_dense() - expm(-0.1j * h.to_dense())) / 16
    assert dist < 1e-6


def test_trace_factorizes():
    a = pauli_string_mpo(PauliTerm(1.0, "ZI"))
    b = mpo_multiply(a, a)
    assert b.trace() == pytest.approx(4.0)
    m = MatrixProductOperator([np.diag([1.0, 2.0]).reshape(2, 2, 1, 1), np.diag([3.0, 1.0]).reshape(2, 2, 1, 1)])
    assert m.trace() == pytest.approx(3.0 * 4.0)


def test_container_roundtrip(tmp_path):
    m = random_mpo(4, 3, 5)
    m.save(tmp_path / "m.mpo")
    back = MatrixProductOperator.load(tmp_path / "m.mpo")
    assert all(np.array_equal(a, b) for a, b in zip(m.tensors, back.tensors))
    with pytest.raises(ValueError):
        from tnqpde.mps import MatrixProductState
        MatrixProductState.load(tmp_path / "m.mpo")
