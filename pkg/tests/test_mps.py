import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnqpde.mps import (
    MatrixProductState,
    add,
    attach_ancilla,
    build_superposition,
    from_dense,
    inner,
    product_state,
    random_mps,
)


def test_inner_normalized_and_orthogonal():
    x = random_mps(5, 3, seed=1)
    assert abs(inner(x, x) - 1) < 1e-12
    assert inner(product_state([0, 0]), product_state([0, 1])) == 0


def test_inner_vs_dense():
    x, y = random_mps(6, 4, seed=2), random_mps(6, 3, seed=3)
    assert abs(inner(x, y) - np.vdot(x.to_dense(), y.to_dense())) < 1e-12


def test_inner_site_mismatch():
    with pytest.raises(ValueError):
        inner(random_mps(3, 2), random_mps(4, 2))


def test_add_basis_states():
    s = add(product_state([0]), product_state([1])).normalized()
    assert np.allclose(s.to_dense(), [2**-0.5, 2**-0.5])


def test_add_cancellation():
    x = random_mps(4, 3, seed=4)
    assert add(x, -x).norm() < 1e-12


def test_add_vs_dense_and_bonds():
    x, y = random_mps(5, 2, seed=5), random_mps(5, 3, seed=6)
    s = add(x, y)
    assert np.max(np.abs(s.to_dense() - x.to_dense() - y.to_dense())) < 1e-12
    assert s.bond_dims == [a + b for a, b in zip(x.bond_dims, y.bond_dims)]


def test_attach_ancilla():
    x = random_mps(4, 2, seed=7)
    a0 = attach_ancilla(x, 0)
    v = a0.to_dense()
    assert np.allclose(v[16:], 0) and np.allclose(v[:16], x.to_dense())
    assert abs(inner(a0, attach_ancilla(x, 1))) < 1e-14
    with pytest.raises(ValueError):
        attach_ancilla(x, 2)


def test_superposition_basis_example():
    s = build_superposition(product_state([0, 0]), product_state([1, 1]))
    v = s.to_dense()
    expect = np.zeros(8)
    expect[0] = expect[7] = 2**-0.5
    assert np.allclose(np.abs(v), expect)


def test_superposition_identical_branches():
    g = random_mps(3, 2, seed=8)
    s = build_superposition(g, g)
    assert abs(abs(inner(attach_ancilla(g, 0), s)) - 2**-0.5) < 1e-12


@given(st.integers(2, 7), st.integers(1, 4), st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_superposition_properties(n, chi, seed):
    g, e = random_mps(n, chi, seed=seed), random_mps(n, chi, seed=seed + 1)
    s = build_superposition(g, e)
    assert abs(s.norm() - 1) < 1e-10
    assert s.is_left_canonical(1e-10)
    v = s.to_dense()
    assert abs(np.sum(np.abs(v[: 2**n]) ** 2) - 0.5) < 1e-10


@given(st.integers(1, 8), st.integers(1, 5), st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_canonical_forms_preserve_state(n, chi, seed):
    x = random_mps(n, chi, seed=seed, normalize=False)
    ref = random_mps(n, 2, seed=seed + 7)
    v = x.to_dense()
    for y in (x.left_canonicalize(), x.right_canonicalize()):
        assert np.max(np.abs(y.to_dense() - v)) < 1e-10 * max(1.0, np.abs(v).max())
        assert abs(inner(ref, y) - inner(ref, x)) < 1e-10 * max(1.0, x.norm())
    assert x.left_canonicalize().is_left_canonical()


def test_dense_roundtrip_12_sites():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(2**12) + 1j * rng.standard_normal(2**12)
    v /= np.linalg.norm(v)
    assert np.max(np.abs(from_dense(v).to_dense() - v)) < 1e-10


def test_compress_keeps_exact_state():
    x = random_mps(6, 3, seed=9)
    s = add(x, x).compress(1e-12)
    assert max(s.bond_dims) <= 3
    assert np.max(np.abs(s.to_dense() - 2 * x.to_dense())) < 1e-10


def test_boundary_validation():
    with pytest.raises(ValueError):
        MatrixProductState([np.zeros((2, 2, 1))])


def test_container_roundtrip(tmp_path):
    x = random_mps(5, 3, seed=10)
    x.save(tmp_path / "x.mps")
    y = MatrixProductState.load(tmp_path / "x.mps")
    assert all(np.array_equal(a, b) for a, b in zip(x.tensors, y.tensors))
