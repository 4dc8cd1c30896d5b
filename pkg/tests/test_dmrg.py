import numpy as np
import pytest

from tnqpde.dmrg import DmrgSchedule, dmrg_excited, dmrg_ground, expectation, hermiticity_error
from tnqpde.hamiltonian import PauliTerm, QubitHamiltonian, exact_spectrum, hubbard_1d
from tnqpde.mpo import MatrixProductOperator, hamiltonian_to_mpo, identity_mpo
from tnqpde.mps import inner, product_state

SMALL = DmrgSchedule.uniform(6, 16)


def test_schedule_validation():
    with pytest.raises(ValueError):
        DmrgSchedule(n_sweeps=2, max_bond_per_sweep=[4])
    with pytest.raises(ValueError):
        DmrgSchedule.uniform(2, 4, cutoff=0.0)
    d = DmrgSchedule()
    assert d.max_bond_per_sweep == [10] * 3 + [50] * 12 + [1000] * 5 and d.svd_cutoff == 1e-12
    assert DmrgSchedule.molecular().svd_cutoff == 1e-8


def test_xx_ground_state():
    h = QubitHamiltonian(2, [PauliTerm(-1.0, "XX")])
    res = dmrg_ground(hamiltonian_to_mpo(h), SMALL)
    assert abs(res.energy + 1) < 1e-10
    v = res.state.to_dense()
    assert abs(abs(np.vdot(v, np.array([1, 0, 0, 1]) / np.sqrt(2))) - 1) < 1e-8


def test_identity_hamiltonian():
    res = dmrg_ground(identity_mpo(3), SMALL)
    assert abs(res.energy - 1) < 1e-10 and abs(res.state.norm() - 1) < 1e-10


def test_zz_first_excited():
    h = QubitHamiltonian(2, [PauliTerm(-1.0, "ZZ"), PauliTerm(0.1, "ZI")])
    m = hamiltonian_to_mpo(h)
    g = dmrg_ground(m, SMALL)
    e = dmrg_excited(m, [g.state], SMALL, seed=1)
    ev = exact_spectrum(h, 2)
    assert abs(g.energy - ev[0]) < 1e-10 and abs(e.energy - ev[1]) < 1e-8
    assert abs(inner(g.state, e.state)) < 1e-4


def test_empty_below_equals_ground():
    m = hamiltonian_to_mpo(hubbard_1d(2))
    a, b = dmrg_ground(m, SMALL, seed=3), dmrg_excited(m, [], SMALL, seed=3)
    assert a.energy == b.energy


def test_non_hermitian_rejected():
    t = np.zeros((2, 2, 1, 1), dtype=complex)
    t[0, 1] = 1.0
    m = MatrixProductOperator([t, np.eye(2).reshape(2, 2, 1, 1)])
    assert hermiticity_error(m) > 0.5
    with pytest.raises(ValueError):
        dmrg_ground(m, SMALL)


def test_sweep_energies_non_increasing():
    res = dmrg_ground(hamiltonian_to_mpo(hubbard_1d(3)), DmrgSchedule.uniform(8, 32))
    e = res.sweep_energies
    assert all(b <= a + 1e-9 for a, b in zip(e, e[1:]))
    ref = exact_spectrum(hubbard_1d(3), 1)[0]
    assert abs(res.energy - ref) < 1e-8


def test_hubbard_four_sites_gap():
    m = hamiltonian_to_mpo(hubbard_1d(4))
    g = dmrg_ground(m)
    e = dmrg_excited(m, [g.state], seed=1)
    assert abs(g.energy + 20.911) < 1e-3
    assert abs(e.energy - g.energy - 0.254) < 2e-3
    assert e.energy >= g.energy - 1e-9
    assert abs(inner(g.state, e.state)) < 1e-4
    assert abs(expectation(g.state, m).real - g.energy) < 1e-10


def test_single_site():
    m = hamiltonian_to_mpo(QubitHamiltonian(1, [PauliTerm(1.0, "Z")]))
    g = dmrg_ground(m)
    assert abs(g.energy + 1) < 1e-12
    e = dmrg_excited(m, [product_state([1])])
    assert abs(e.energy - 1) < 1e-12
