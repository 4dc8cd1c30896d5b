import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_unitary
from tnqpde.brickwall import BrickWallCircuit, init_circuit, layer_pairs
from tnqpde.circuit_sim import (
    NoiseSpec,
    QpdeSimulator,
    Statevector,
    apply_brickwall,
    apply_phase,
    run_qpde_circuit,
    sample_probability,
    step_count,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def random_state(n, rng):
    v = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    return Statevector(n, v / np.linalg.norm(v))


def random_circuit(n, d, rng):
    return BrickWallCircuit(n, {(l, q): random_unitary(4, rng) for l in range(d) for q in layer_pairs(n, l)}, d)


def toy_pair(e0, e1, dt):
    """Exact 3-qubit preparation and 2-qubit evolution for a diagonal toy H.

    The preparation gives (|0>|00> + |1>|10>)/sqrt2; the evolution applies
    exp(-i E dt) with E = e0 on |00> and e1 on |10>.
    """
    prep = BrickWallCircuit(3, {(0, 0): CNOT @ np.kron(H, np.eye(2))}, 1)
    diag = np.exp(-1j * dt * np.array([e0, 0.3, e1, -0.7]))
    evol = BrickWallCircuit(2, {(0, 0): np.diag(diag)}, 1)
    return prep, evol


def test_identity_circuit_leaves_state(rng):
    psi = random_state(5, rng)
    out = apply_brickwall(psi, init_circuit(5, 3, scale=0.0))
    assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 7), d=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_forward_adjoint_round_trip(n, d, seed):
    rng = np.random.default_rng(seed)
    psi = random_state(n, rng)
    c = random_circuit(n, d, rng)
    back = apply_brickwall(apply_brickwall(psi, c), c, adjoint=True)
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-10)


def test_matches_dense_matrix(rng):
    psi = random_state(4, rng)
    c = random_circuit(4, 3, rng)
    assert np.allclose(apply_brickwall(psi, c).amplitudes, c.to_dense() @ psi.amplitudes, atol=1e-12)


def test_offset_application(rng):
    psi = random_state(5, rng)
    c = random_circuit(3, 2, rng)
    want = np.kron(np.kron(np.eye(2), c.to_dense()), np.eye(2)) @ psi.amplitudes
    assert np.allclose(apply_brickwall(psi, c, offset=1).amplitudes, want, atol=1e-12)
    with pytest.raises(ValueError):
        apply_brickwall(psi, c, offset=3)


def test_norm_check():
    with pytest.raises(ValueError):
        Statevector(2, np.ones(4)).check_norm()
    with pytest.raises(ValueError):
        Statevector(3, np.ones(4))


def test_apply_phase(rng):
    psi = random_state(3, rng)
    assert np.allclose(apply_phase(psi, 1, 0.0).amplitudes, psi.amplitudes)
    one = Statevector(1, [0, 1])
    assert np.allclose(apply_phase(one, 0, np.pi).amplitudes, [0, -1])
    out = apply_phase(psi, 0, 0.7)
    assert np.allclose(out.amplitudes[:4], psi.amplitudes[:4])
    assert np.allclose(out.amplitudes[4:], np.exp(0.7j) * psi.amplitudes[4:])
    g = apply_phase(Statevector(3, psi.amplitudes * np.exp(0.3j)), 2, 1.1)
    assert np.allclose(np.abs(g.amplitudes) ** 2, np.abs(apply_phase(psi, 2, 1.1).amplitudes) ** 2)
    with pytest.raises(IndexError):
        apply_phase(psi, 3, 1.0)


def test_step_count():
    assert step_count(0.5, 0.1) == 5
    assert step_count(0.3, 0.1) == 3
    with pytest.raises(ValueError):
        step_count(0.25, 0.1)
    with pytest.raises(ValueError):
        step_count(0.0, 0.1)


def test_noise_spec_range():
    with pytest.raises(ValueError):
        NoiseSpec(1.5)
    with pytest.raises(ValueError):
        NoiseSpec(-0.1)


def test_sample_probability():
    assert sample_probability(0.0, 100) == 0.0
    assert sample_probability(1.0, 100) == 1.0
    assert abs(sample_probability(0.5, 10**6, seed=0) - 0.5) < 0.002
    assert sample_probability(0.3, 1000, seed=5) == sample_probability(0.3, 1000, seed=5)
    with pytest.raises(ValueError):
        sample_probability(1.2, 10)
    with pytest.raises(ValueError):
        sample_probability(0.2, 0)


def test_likelihood_shape_exact_gates():
    e0, e1, dt = -1.3, 0.9, 0.1
    prep, evol = toy_pair(e0, e1, dt)
    t = 0.7
    for eps in np.linspace(-1, 4, 11):
        p0, _ = run_qpde_circuit(prep, evol, eps, t, dt)
        assert p0 == pytest.approx(0.5 * (1 + np.cos((e1 - e0 - eps) * t)), abs=1e-12)
    p_peak, _ = run_qpde_circuit(prep, evol, e1 - e0, t, dt)
    assert p_peak == pytest.approx(1.0, abs=1e-12)


def test_likelihood_shape_dense_hamiltonian(rng):
    # random 2-qubit H; layer 1 of the preparation rotates into its eigenbasis so
    # the branches are |0>|ground> and |1>|first excited>
    a = rng.standard_normal((4, 4))
    h = (a + a.T) / 2
    w, v = np.linalg.eigh(h)
    basis = v[:, [0, 2, 1, 3]]
    prep = BrickWallCircuit(3, {(0, 0): CNOT @ np.kron(H, np.eye(2)), (1, 1): basis}, 2)
    dt = 0.1
    evol = BrickWallCircuit(2, {(0, 0): expm(-1j * dt * h)}, 1)
    eps = np.linspace(0, 3, 13)
    for t in (0.3, 1.0):
        p0, _ = QpdeSimulator(prep, evol, dt).probabilities(eps, t)
        assert np.allclose(p0, 0.5 * (1 + np.cos((w[1] - w[0] - eps) * t)), atol=1e-6)


def test_full_depolarization_floor():
    prep, evol = toy_pair(-1.0, 0.5, 0.1)
    for eps in (0.0, 1.5, 3.0):
        _, p = run_qpde_circuit(prep, evol, eps, 0.4, 0.1, NoiseSpec(1.0))
        assert p == pytest.approx(2.0**-3, abs=1e-15)


def test_noise_affine_peak_invariant():
    prep, evol = toy_pair(-1.0, 0.5, 0.1)
    sim = QpdeSimulator(prep, evol, 0.1)
    eps = np.linspace(0, 3, 31)
    ideal, _ = sim.probabilities(eps, 1.2)
    for p_dep in (0.3, 0.9):
        _, noisy = sim.probabilities(eps, 1.2, NoiseSpec(p_dep))
        assert np.argmax(noisy) == np.argmax(ideal)
        assert np.min(noisy) >= p_dep / 2**3 - 1e-15
        assert np.allclose(noisy, (1 - p_dep) * ideal + p_dep / 8, atol=1e-15)


def test_floor_halves_per_qubit():
    assert NoiseSpec(0.4).apply(0.0, 9) == pytest.approx(NoiseSpec(0.4).apply(0.0, 8) / 2)


def test_simulator_matches_gate_by_gate(rng):
    prep = random_circuit(4, 3, rng)
    evol = random_circuit(3, 2, rng)
    sim = QpdeSimulator(prep, evol, 0.1)
    for t in (0.3, 0.1, 0.5):
        eps = [-0.4, 0.2, 1.1]
        p_fast, n_fast = sim.probabilities(eps, t, NoiseSpec(0.2))
        for e, pf, nf in zip(eps, p_fast, n_fast):
            p, n = run_qpde_circuit(prep, evol, e, t, 0.1, NoiseSpec(0.2))
            assert pf == pytest.approx(p, abs=1e-12)
            assert nf == pytest.approx(n, abs=1e-12)


def test_size_mismatch():
    with pytest.raises(ValueError):
        run_qpde_circuit(init_circuit(4, 1), init_circuit(4, 1), 0.0, 0.1, 0.1)
    with pytest.raises(ValueError):
        QpdeSimulator(init_circuit(3, 1), init_circuit(3, 1), 0.1)
