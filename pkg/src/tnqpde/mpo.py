"""Matrix product operators and the Trotterized reference evolution.

Site tensors have shape ``(out, in, left, right)``. The dense matrix of an MPO
uses the same big-endian qubit ordering as :mod:`tnqpde.hamiltonian`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .containers import read_tensors, write_tensors
from .hamiltonian import PauliTerm, QubitHamiltonian, pauli_matrix
from .tensor_core import svd_truncated

log = logging.getLogger(__name__)

MAX_DENSE_SITES = 14

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass
class MatrixProductOperator:
    tensors: list[np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tensors = [np.asarray(t, dtype=np.complex128) for t in self.tensors]
        if not self.tensors:
            raise ValueError("an MPO needs at least one site")
        if self.tensors[0].shape[2] != 1 or self.tensors[-1].shape[3] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for k in range(len(self.tensors) - 1):
            if self.tensors[k].shape[3] != self.tensors[k + 1].shape[2]:
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[3] for t in self.tensors[:-1]]

    @property
    def max_bond(self) -> int:
        return max([1] + self.bond_dims)

    def copy(self) -> "MatrixProductOperator":
        return MatrixProductOperator([t.copy() for t in self.tensors], dict(self.meta))

    def dagger(self) -> "MatrixProductOperator":
        return MatrixProductOperator([t.conj().transpose(1, 0, 2, 3) for t in self.tensors], dict(self.meta))

    def scaled(self, alpha: complex) -> "MatrixProductOperator":
        out = self.copy()
        out.tensors[0] = out.tensors[0] * alpha
        return out

    def trace(self) -> complex:
        e = np.ones((1,), dtype=np.complex128)
        for t in self.tensors:
            e = e @ np.einsum("iilr->lr", t)
        return complex(e[0])

    def to_dense(self) -> np.ndarray:
        return mpo_to_dense(self)

    def save(self, path: str | Path) -> None:
        write_tensors(path, "mpo", self.tensors, self.meta)

    @classmethod
    def load(cls, path: str | Path) -> "MatrixProductOperator":
        ts, meta = read_tensors(path, "mpo")
        return cls(ts, meta)


def identity_mpo(n: int) -> MatrixProductOperator:
    if n < 1:
        raise ValueError("n must be >= 1")
    eye = np.eye(2, dtype=np.complex128).reshape(2, 2, 1, 1)
    return MatrixProductOperator([eye.copy() for _ in range(n)])


def operator_product_mpo(ops: list[np.ndarray], coeff: complex = 1.0) -> MatrixProductOperator:
    """Bond-1 MPO for ``coeff * ops[0] (x) ops[1] (x) ...``."""
    ts = [np.asarray(o, dtype=np.complex128).reshape(2, 2, 1, 1) for o in ops]
    ts[0] = ts[0] * coeff
    return MatrixProductOperator(ts)


def pauli_string_mpo(term: PauliTerm) -> MatrixProductOperator:
    return operator_product_mpo([_PAULI[c] for c in term.string], term.coefficient)


def mpo_to_dense(m: MatrixProductOperator) -> np.ndarray:
    if m.n_sites > MAX_DENSE_SITES:
        raise ValueError(f"dense conversion is limited to {MAX_DENSE_SITES} sites")
    acc = np.ones((1, 1, 1), dtype=np.complex128)  # (out, in, bond)
    for t in m.tensors:
        acc = np.einsum("abl,cdlr->acbdr", acc, t)
        o, c, i, d, r = acc.shape
        acc = acc.reshape(o * c, i * d, r)
    return acc[:, :, 0]


def mpo_from_dense(mat: np.ndarray, n: int, cutoff: float = 0.0) -> MatrixProductOperator:
    """Exact (cutoff 0) MPO factorization of a ``2^n x 2^n`` matrix."""
    t = np.asarray(mat, dtype=np.complex128).reshape([2] * (2 * n))
    # interleave to (o0, i0, o1, i1, ...)
    order = [x for k in range(n) for x in (k, n + k)]
    t = t.transpose(order).reshape(1, -1)
    ts = []
    for k in range(n - 1):
        l = t.shape[0]
        res = svd_truncated(t.reshape(l * 4, -1), 1, cutoff=cutoff)
        ts.append(res.u.reshape(l, 2, 2, -1).transpose(1, 2, 0, 3))
        t = res.s[:, None] * res.vdag
    ts.append(t.reshape(t.shape[0], 2, 2, 1).transpose(1, 2, 0, 3))
    return MatrixProductOperator(ts)


# --- canonical moves on (o, i, l, r) tensors ----------------------------------


def _qr_right(ts: list[np.ndarray], k: int) -> None:
    """Left-orthonormalize site k and push the R factor into site k+1."""
    o, i, l, r = ts[k].shape
    m = ts[k].transpose(2, 0, 1, 3).reshape(l * o * i, r)
    q, rr = np.linalg.qr(m)
    ts[k] = q.reshape(l, o, i, -1).transpose(1, 2, 0, 3)
    ts[k + 1] = np.einsum("ab,oibr->oiar", rr, ts[k + 1])


def _qr_left(ts: list[np.ndarray], k: int) -> None:
    """Right-orthonormalize site k and push the R factor into site k-1."""
    o, i, l, r = ts[k].shape
    m = ts[k].transpose(2, 0, 1, 3).reshape(l, o * i * r)
    q, rr = np.linalg.qr(m.T)
    ts[k] = q.T.reshape(-1, o, i, r).transpose(1, 2, 0, 3)
    ts[k - 1] = np.einsum("oila,ba->oilb", ts[k - 1], rr)


def _svd_left(ts: list[np.ndarray], k: int, cutoff: float, max_bond: int | None) -> float:
    """Truncate bond (k-1, k), right-orthonormalizing site k; returns discarded weight."""
    o, i, l, r = ts[k].shape
    m = ts[k].transpose(2, 0, 1, 3).reshape(l, o * i * r)
    res = svd_truncated(m, 1, cutoff=cutoff, max_bond=max_bond, mode="weight")
    chi = res.s.size
    ts[k] = res.vdag.reshape(chi, o, i, r).transpose(1, 2, 0, 3)
    us = res.u * res.s[None, :]
    ts[k - 1] = np.einsum("oila,ab->oilb", ts[k - 1], us)
    return res.discarded_weight


def canonicalize(m: MatrixProductOperator, center: int = 0) -> MatrixProductOperator:
    ts = [t.copy() for t in m.tensors]
    for k in range(center):
        _qr_right(ts, k)
    for k in range(len(ts) - 1, center, -1):
        _qr_left(ts, k)
    return MatrixProductOperator(ts, dict(m.meta))


def compress(m: MatrixProductOperator, cutoff: float = 1e-12, max_bond: int | None = None) -> MatrixProductOperator:
    """Left-to-right QR sweep then a truncating right-to-left SVD sweep."""
    ts = [t.copy() for t in m.tensors]
    for k in range(len(ts) - 1):
        _qr_right(ts, k)
    discarded = 0.0
    for k in range(len(ts) - 1, 0, -1):
        discarded += _svd_left(ts, k, cutoff, max_bond)
    meta = dict(m.meta)
    meta["discarded_weight"] = meta.get("discarded_weight", 0.0) + discarded
    return MatrixProductOperator(ts, meta)


def _site_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # (a b)[o, i] = sum_k a[o, k] b[k, i]; bonds are tensor-producted
    c = np.einsum("oklr,kimn->oilmrn", a, b)
    o, i, la, lb, ra, rb = c.shape
    return c.reshape(o, i, la * lb, ra * rb)


def mpo_multiply(a: MatrixProductOperator, b: MatrixProductOperator, cutoff: float | None = 1e-12,
                 max_bond: int | None = None) -> MatrixProductOperator:
    """MPO of the operator product ``a @ b``, SVD-compressed unless ``cutoff`` is None."""
    if a.n_sites != b.n_sites:
        raise ValueError(f"site-count mismatch: {a.n_sites} vs {b.n_sites}")
    prod_mpo = MatrixProductOperator([_site_product(x, y) for x, y in zip(a.tensors, b.tensors)])
    if cutoff is None:
        return prod_mpo
    return compress(prod_mpo, cutoff, max_bond)


def mpo_add(a: MatrixProductOperator, b: MatrixProductOperator) -> MatrixProductOperator:
    if a.n_sites != b.n_sites:
        raise ValueError(f"site-count mismatch: {a.n_sites} vs {b.n_sites}")
    n = a.n_sites
    if n == 1:
        return MatrixProductOperator([a.tensors[0] + b.tensors[0]])
    ts = []
    for k, (x, y) in enumerate(zip(a.tensors, b.tensors)):
        if k == 0:
            ts.append(np.concatenate([x, y], axis=3))
        elif k == n - 1:
            ts.append(np.concatenate([x, y], axis=2))
        else:
            t = np.zeros((2, 2, x.shape[2] + y.shape[2], x.shape[3] + y.shape[3]), dtype=np.complex128)
            t[:, :, : x.shape[2], : x.shape[3]] = x
            t[:, :, x.shape[2]:, x.shape[3]:] = y
            ts.append(t)
    return MatrixProductOperator(ts)


def hamiltonian_to_mpo(h: QubitHamiltonian, cutoff: float = 1e-20, batch: int = 40) -> MatrixProductOperator:
    """Sum of Pauli-string MPOs, compressed every ``batch`` terms.

    ``cutoff`` is a relative discarded weight; the default only removes
    round-off, so the MPO is exact to working precision.
    """
    terms = [t for t in h.terms if t.coefficient != 0.0]
    if not terms:
        z = np.zeros((2, 2, 1, 1), dtype=np.complex128)
        return MatrixProductOperator([z.copy() for _ in range(h.n_qubits)])
    acc = None
    for start in range(0, len(terms), batch):
        chunk = None
        for t in terms[start:start + batch]:
            p = pauli_string_mpo(t)
            chunk = p if chunk is None else mpo_add(chunk, p)
        chunk = compress(chunk, cutoff)
        acc = chunk if acc is None else compress(mpo_add(acc, chunk), cutoff)
    acc.meta.pop("discarded_weight", None)
    return acc


def pauli_string_evolution_mpo(term: PauliTerm, dtau: float, cutoff: float = 1e-12) -> MatrixProductOperator:
    """MPO of ``exp(i c P dtau)`` built on the support of ``P`` only.

    The non-identity factors are gathered into a compact operator, which is
    exponentiated and split back onto its sites by successive SVDs; identity
    sites inside the support interval carry the bond through unchanged.
    """
    n = len(term.string)
    theta = term.coefficient * dtau
    support = term.support
    eye = np.eye(2, dtype=np.complex128).reshape(2, 2, 1, 1)
    if not support:
        m = identity_mpo(n)
        m.tensors[0] = m.tensors[0] * np.exp(1j * theta)
        return m
    k = len(support)
    compact = pauli_matrix("".join(term.string[s] for s in support))
    u = np.cos(theta) * np.eye(2**k) + 1j * np.sin(theta) * compact
    local = mpo_from_dense(u, k, cutoff=cutoff).tensors
    ts: list[np.ndarray] = []
    j = 0
    for site in range(n):
        if site < support[0] or site > support[-1]:
            ts.append(eye.copy())
        elif site == support[j]:
            ts.append(local[j])
            j += 1
        else:
            chi = ts[-1].shape[3]
            ts.append(np.einsum("oi,lr->oilr", np.eye(2), np.eye(chi)).astype(np.complex128))
    return MatrixProductOperator(ts)


class _LocalProductBuilder:
    """Accumulates ``M <- E @ M`` for support-local factors ``E``.

    ``M`` is kept in mixed canonical form, so truncating only the bonds inside
    the support interval of each factor is the optimal truncation; bonds
    outside the interval are untouched by a factor whose bonds there are 1.
    """

    def __init__(self, m: MatrixProductOperator, cutoff: float):
        self.cutoff = cutoff
        self.ts = canonicalize(m, 0).tensors
        self.center = 0
        self.discarded = 0.0

    def _move(self, target: int) -> None:
        while self.center < target:
            _qr_right(self.ts, self.center)
            self.center += 1
        while self.center > target:
            _qr_left(self.ts, self.center)
            self.center -= 1

    def apply(self, e: MatrixProductOperator, lo: int, hi: int) -> None:
        self._move(lo)
        for k in range(lo, hi + 1):
            self.ts[k] = _site_product(e.tensors[k], self.ts[k])
        if hi == lo:
            return
        for k in range(lo, hi):
            _qr_right(self.ts, k)
        for k in range(hi, lo, -1):
            self.discarded += _svd_left(self.ts, k, self.cutoff, None)
        self.center = lo

    def result(self) -> MatrixProductOperator:
        return MatrixProductOperator([t.copy() for t in self.ts], {"discarded_weight": self.discarded})


REFERENCE_CUTOFF = 1e-16


def trotterized_reference(h: QubitHamiltonian, dt: float, n_slices: int = 100,
                          cutoff: float = REFERENCE_CUTOFF) -> MatrixProductOperator:
    """Second-order Trotter MPO approximating ``exp(-i H dt)``.

    Each of the ``n_slices`` slices applies every term forward and then in
    reverse order, each factor with step ``dt / (2 n_slices)``. ``cutoff`` is
    the relative discarded weight allowed per SVD; truncation happens only on
    the bonds inside each factor's support.
    """
    if dt <= 0 or n_slices < 1:
        raise ValueError("need dt > 0 and n_slices >= 1")
    terms = [t for t in h.terms if t.coefficient != 0.0]
    n = h.n_qubits
    if not terms:
        return identity_mpo(n)
    dtau = dt / (2 * n_slices)
    factors = []
    for t in terms:
        sup = t.support
        lo, hi = (sup[0], sup[-1]) if sup else (0, 0)
        factors.append((pauli_string_evolution_mpo(t, -dtau, cutoff), lo, hi))
    builder = _LocalProductBuilder(identity_mpo(n), cutoff)
    sequence = factors + factors[::-1]
    for _ in range(n_slices):
        for e, lo, hi in sequence:
            builder.apply(e, lo, hi)
    out = builder.result()
    out.meta.update({"dt": dt, "n_slices": n_slices, "cutoff": cutoff})
    log.debug("reference MPO bonds %s, discarded %.3e", out.bond_dims, out.meta["discarded_weight"])
    return out


def trotter_product_dense(h: QubitHamiltonian, dt: float, order: int = 1) -> np.ndarray:
    """Single-step first- or second-order Trotter product as a dense matrix."""
    n = h.n_qubits
    terms = [t for t in h.terms if t.coefficient != 0.0]

    def factor(t: PauliTerm, step: float) -> np.ndarray:
        return np.cos(t.coefficient * step) * np.eye(2**n) - 1j * np.sin(t.coefficient * step) * pauli_matrix(t.string)

    u = np.eye(2**n, dtype=np.complex128)
    if order == 1:
        for t in terms:
            u = factor(t, dt) @ u
    elif order == 2:
        for t in terms:
            u = factor(t, dt / 2) @ u
        for t in reversed(terms):
            u = factor(t, dt / 2) @ u
    else:
        raise ValueError("order must be 1 or 2")
    return u
