"""Matrix product states.

Site tensors have shape ``(phys, left, right)``; boundary bonds have
dimension 1. Site 0 is the most significant qubit of the dense vector, which
also makes it the ancilla in QPDE states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .containers import read_tensors, write_tensors
from .tensor_core import svd_truncated

MAX_DENSE_SITES = 24


@dataclass
class MatrixProductState:
    tensors: list[np.ndarray]
    canonical_form: str | None = None  # None | "left" | "right" | "mixed"
    center: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tensors = [np.asarray(t, dtype=np.complex128) for t in self.tensors]
        if not self.tensors:
            raise ValueError("an MPS needs at least one site")
        if self.tensors[0].shape[1] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for k in range(len(self.tensors) - 1):
            if self.tensors[k].shape[2] != self.tensors[k + 1].shape[1]:
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([t.copy() for t in self.tensors], self.canonical_form, self.center, dict(self.meta))

    def __mul__(self, alpha: complex) -> "MatrixProductState":
        out = self.copy()
        out.tensors[0] = out.tensors[0] * alpha
        return out

    __rmul__ = __mul__

    def __neg__(self) -> "MatrixProductState":
        return self * -1.0

    def norm(self) -> float:
        # QR sweep rather than sqrt(<x|x>), which loses half the digits near zero
        r = np.ones((1, 1), dtype=np.complex128)
        for t in self.tensors:
            m = np.einsum("ab,sbr->asr", r, t).reshape(-1, t.shape[2])
            r = np.linalg.qr(m, mode="r")
        return float(np.linalg.norm(r))

    def to_dense(self) -> np.ndarray:
        if self.n_sites > MAX_DENSE_SITES:
            raise ValueError("state too large for a dense vector")
        v = np.ones((1, 1), dtype=np.complex128)
        for a in self.tensors:
            v = np.einsum("pl,slr->psr", v, a).reshape(-1, a.shape[2])
        return v.reshape(-1)

    def left_canonicalize(self, normalize: bool = False) -> "MatrixProductState":
        """Return a left-canonical copy (QR sweep), the norm kept on the last site."""
        ts = [t.copy() for t in self.tensors]
        for k in range(len(ts) - 1):
            s, l, r = ts[k].shape
            m = ts[k].transpose(1, 0, 2).reshape(l * s, r)
            q, rr = np.linalg.qr(m)
            chi = q.shape[1]
            ts[k] = q.reshape(l, s, chi).transpose(1, 0, 2)
            ts[k + 1] = np.einsum("ab,sbr->sar", rr, ts[k + 1])
        if normalize:
            nrm = np.linalg.norm(ts[-1])
            if nrm == 0:
                raise ValueError("cannot normalize a zero-norm state")
            ts[-1] = ts[-1] / nrm
        return MatrixProductState(ts, "left", len(ts) - 1, dict(self.meta))

    def right_canonicalize(self, normalize: bool = False) -> "MatrixProductState":
        ts = [t.copy() for t in self.tensors]
        for k in range(len(ts) - 1, 0, -1):
            s, l, r = ts[k].shape
            m = ts[k].transpose(1, 0, 2).reshape(l, s * r)
            q, rr = np.linalg.qr(m.T)
            chi = q.shape[1]
            ts[k] = q.T.reshape(chi, s, r).transpose(1, 0, 2)
            ts[k - 1] = np.einsum("slb,ab->sla", ts[k - 1], rr)
        if normalize:
            nrm = np.linalg.norm(ts[0])
            if nrm == 0:
                raise ValueError("cannot normalize a zero-norm state")
            ts[0] = ts[0] / nrm
        return MatrixProductState(ts, "right", 0, dict(self.meta))

    def normalized(self) -> "MatrixProductState":
        return self.left_canonicalize(normalize=True)

    def compress(self, cutoff: float = 1e-12, max_bond: int | None = None) -> "MatrixProductState":
        """SVD-truncate every bond; the result is left-canonical."""
        ts = self.right_canonicalize().tensors
        for k in range(len(ts) - 1):
            res = svd_truncated(ts[k].transpose(1, 0, 2), 2, cutoff=cutoff, max_bond=max_bond)
            ts[k] = res.u.transpose(1, 0, 2)
            sv = res.s[:, None] * res.vdag
            ts[k + 1] = np.einsum("ab,sbr->sar", sv, ts[k + 1])
        return MatrixProductState(ts, "left", len(ts) - 1, dict(self.meta))

    def is_left_canonical(self, atol: float = 1e-10, upto: int | None = None) -> bool:
        stop = self.n_sites - 1 if upto is None else upto
        for t in self.tensors[:stop]:
            s, l, r = t.shape
            m = t.transpose(1, 0, 2).reshape(l * s, r)
            if not np.allclose(m.conj().T @ m, np.eye(r), atol=atol, rtol=0):
                return False
        return True

    def save(self, path: str | Path) -> None:
        write_tensors(path, "mps", self.tensors, {"canonical_form": self.canonical_form, **self.meta})

    @classmethod
    def load(cls, path: str | Path) -> "MatrixProductState":
        ts, meta = read_tensors(path, "mps")
        form = meta.pop("canonical_form", None)
        return cls(ts, form, None, meta)


def product_state(bits, phys: int = 2) -> MatrixProductState:
    ts = []
    for b in bits:
        t = np.zeros((phys, 1, 1), dtype=np.complex128)
        t[int(b), 0, 0] = 1.0
        ts.append(t)
    return MatrixProductState(ts, "left", len(ts) - 1)


def from_dense(vec: np.ndarray, cutoff: float = 0.0, phys: int = 2) -> MatrixProductState:
    vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
    n = int(round(np.log(vec.size) / np.log(phys)))
    if phys**n != vec.size:
        raise ValueError("vector length is not a power of the physical dimension")
    ts = []
    rest = vec.reshape(1, -1)
    for k in range(n - 1):
        l = rest.shape[0]
        m = rest.reshape(l * phys, -1)
        res = svd_truncated(m, 1, cutoff=cutoff)
        ts.append(res.u.reshape(l, phys, -1).transpose(1, 0, 2))
        rest = res.s[:, None] * res.vdag
    ts.append(rest.reshape(rest.shape[0], phys, 1).transpose(1, 0, 2))
    return MatrixProductState(ts, "left", n - 1)


def random_mps(n_sites: int, bond: int, seed: int = 0, real: bool = False, normalize: bool = True) -> MatrixProductState:
    rng = np.random.default_rng(seed)
    dims = [1] + [min(bond, 2 ** min(k, n_sites - k)) for k in range(1, n_sites)] + [1]
    ts = []
    for k in range(n_sites):
        shape = (2, dims[k], dims[k + 1])
        t = rng.standard_normal(shape)
        if not real:
            t = t + 1j * rng.standard_normal(shape)
        ts.append(t)
    psi = MatrixProductState(ts)
    return psi.normalized() if normalize else psi


def _check_pair(x: MatrixProductState, y: MatrixProductState) -> None:
    if x.n_sites != y.n_sites:
        raise ValueError(f"site-count mismatch: {x.n_sites} vs {y.n_sites}")


def inner(bra: MatrixProductState, ket: MatrixProductState) -> complex:
    """<bra|ket> by a left-to-right transfer contraction."""
    _check_pair(bra, ket)
    e = np.ones((1, 1), dtype=np.complex128)
    for b, k in zip(bra.tensors, ket.tensors):
        e = np.einsum("ab,sac,sbd->cd", e, b.conj(), k, optimize=True)
    return complex(e[0, 0])


def add(x: MatrixProductState, y: MatrixProductState) -> MatrixProductState:
    """Direct-sum MPS representing |x> + |y> (unnormalized)."""
    _check_pair(x, y)
    n = x.n_sites
    if n == 1:
        return MatrixProductState([x.tensors[0] + y.tensors[0]])
    ts = []
    for k, (a, b) in enumerate(zip(x.tensors, y.tensors)):
        s = a.shape[0]
        if k == 0:
            t = np.concatenate([a, b], axis=2)
        elif k == n - 1:
            t = np.concatenate([a, b], axis=1)
        else:
            t = np.zeros((s, a.shape[1] + b.shape[1], a.shape[2] + b.shape[2]), dtype=np.complex128)
            t[:, : a.shape[1], : a.shape[2]] = a
            t[:, a.shape[1]:, a.shape[2]:] = b
        ts.append(t)
    return MatrixProductState(ts)


def attach_ancilla(x: MatrixProductState, bit: int) -> MatrixProductState:
    """|bit> (x) |x> as an (n+1)-site MPS with a bond-1 dummy site in front."""
    if bit not in (0, 1):
        raise ValueError("ancilla bit must be 0 or 1")
    a = np.zeros((2, 1, 1), dtype=np.complex128)
    a[bit, 0, 0] = 1.0
    return MatrixProductState([a] + [t.copy() for t in x.tensors])


def build_superposition(ground: MatrixProductState, excited: MatrixProductState) -> MatrixProductState:
    """Normalized, left-canonical (|0>|ground> + |1>|excited>)/sqrt(2)."""
    _check_pair(ground, excited)
    s = add(attach_ancilla(ground, 0), attach_ancilla(excited, 1))
    return s.left_canonicalize(normalize=True)
