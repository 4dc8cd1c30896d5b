import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_unitary
from tnqpde.tensor_core import (
    ShapeError,
    as_tensor,
    contract,
    is_unitary,
    polar_unitary,
    random_near_identity_unitary,
    svd_truncated,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_contract_identity_action():
    out = contract(np.eye(2), np.array([1.0, 0.0]), [(1, 0)])
    assert np.allclose(out, [1, 0])


def test_contract_pauli_x_squared():
    assert np.allclose(contract(X, X, [(1, 0)]), np.eye(2))


def test_contract_against_loop_oracle(rng):
    a = rng.standard_normal((3, 4, 2)) + 1j * rng.standard_normal((3, 4, 2))
    b = rng.standard_normal((4, 2, 5)) + 1j * rng.standard_normal((4, 2, 5))
    out = contract(a, b, [(1, 0), (2, 1)])
    ref = np.zeros((3, 5), dtype=complex)
    for i in range(3):
        for j in range(5):
            for k in range(4):
                for m in range(2):
                    ref[i, j] += a[i, k, m] * b[k, m, j]
    assert np.max(np.abs(out - ref)) < 1e-12


def test_contract_shape_mismatch():
    with pytest.raises(ShapeError):
        contract(np.zeros((2, 3)), np.zeros((2, 3)), [(1, 0)])


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
@settings(max_examples=25, deadline=None)
def test_contract_bilinear(alpha):
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((4, 2))
    assert np.allclose(contract(alpha * a, b, [(1, 0)]), alpha * contract(a, b, [(1, 0)]), atol=1e-10)


def test_as_tensor_rejects_nan():
    with pytest.raises(ValueError):
        as_tensor([1.0, np.nan])


def test_svd_identity():
    r = svd_truncated(np.eye(2), 1)
    assert np.allclose(r.s, [1, 1]) and r.discarded_weight == 0


def test_svd_rank_one_exact(rng):
    v, w = rng.standard_normal(4), rng.standard_normal(4)
    t = np.outer(v, w)
    r = svd_truncated(t, 1, max_bond=1)
    assert np.allclose(r.u @ np.diag(r.s) @ r.vdag, t, atol=1e-12)
    assert r.discarded_weight < 1e-28


def test_svd_truncation_error_matches_tail(rng):
    t = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    r = svd_truncated(t, 1, cutoff=0.0, max_bond=3)
    s_full = np.linalg.svd(t, compute_uv=False)
    err = np.linalg.norm(t - r.u @ np.diag(r.s) @ r.vdag) ** 2
    assert abs(err - np.sum(s_full[3:] ** 2)) < 1e-10
    assert abs(r.discarded_weight - np.sum(s_full[3:] ** 2) / np.sum(s_full**2)) < 1e-12
    assert is_unitary(r.u.conj().T @ r.u, 1e-10)


def test_svd_never_rank_zero():
    r = svd_truncated(np.full((3, 3), 1e-20), 1, cutoff=1.0)
    assert r.s.size == 1


@given(st.integers(2, 5), st.integers(2, 5), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_svd_full_reconstruction(m, n, seed):
    rng = np.random.default_rng(seed)
    t = rng.standard_normal((m, 2, n)) + 1j * rng.standard_normal((m, 2, n))
    r = svd_truncated(t, [0, 2], cutoff=0.0)
    back = np.einsum("anb,bc->anc", np.einsum("acb,b->acb", r.u, r.s), r.vdag.reshape(r.s.size, -1))
    assert np.linalg.norm(back.reshape(m, n, 2).transpose(0, 2, 1) - t) < 1e-12 * max(1, np.linalg.norm(t))
    assert np.all(np.diff(r.s) <= 1e-14) and np.all(r.s >= 0)


def test_svd_weight_mode(rng):
    t = np.diag([1.0, 1e-3, 1e-9])
    r = svd_truncated(t, 1, cutoff=1e-12, mode="weight")
    assert r.s.size == 2


def test_polar_identity_and_scaled_unitary(rng):
    assert np.allclose(polar_unitary(np.eye(4)), np.eye(4))
    w = random_unitary(4, rng)
    assert np.allclose(polar_unitary(2 * w), w, atol=1e-12)


def test_polar_zero_matrix():
    with pytest.raises(ValueError):
        polar_unitary(np.zeros((2, 2)))


def test_polar_maximality(rng):
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    w = polar_unitary(g)
    best = np.trace(g.conj().T @ w).real
    for _ in range(1000):
        q = random_unitary(4, rng)
        assert np.trace(g.conj().T @ q).real <= best + 1e-12


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_polar_fixes_unitaries(seed):
    w = random_unitary(4, np.random.default_rng(seed))
    assert np.allclose(polar_unitary(w), w, atol=1e-10)


def test_near_identity_unitary():
    assert np.array_equal(random_near_identity_unitary(4, 0.0, 3), np.eye(4))
    u = random_near_identity_unitary(4, 0.1, 7)
    assert np.linalg.norm(u - np.eye(4)) < 1 and is_unitary(u, 1e-10)
    assert np.array_equal(u, random_near_identity_unitary(4, 0.1, 7))
