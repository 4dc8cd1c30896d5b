"""Two-site DMRG for ground and penalty-projected excited states."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .mpo import MatrixProductOperator
from .mps import MatrixProductState, inner
from .tensor_core import svd_truncated

log = logging.getLogger(__name__)

DENSE_LOCAL_DIM = 256
ENERGY_SLACK = 1e-9


@dataclass
class DmrgSchedule:
    n_sweeps: int = 20
    max_bond_per_sweep: list[int] = field(default_factory=lambda: [10] * 3 + [50] * 12 + [1000] * 5)
    svd_cutoff: float = 1e-12
    overlap_penalty_weight: float | None = None  # None: 10 x the MPO's RMS eigenvalue scale
    solver_tol: float = 1e-10

    def __post_init__(self):
        if len(self.max_bond_per_sweep) != self.n_sweeps:
            raise ValueError("max_bond_per_sweep must have one entry per sweep")
        if self.svd_cutoff <= 0:
            raise ValueError("svd_cutoff must be > 0")
        if any(b < 1 for b in self.max_bond_per_sweep):
            raise ValueError("bond dimensions must be >= 1")

    @classmethod
    def hubbard(cls) -> "DmrgSchedule":
        return cls()

    @classmethod
    def molecular(cls) -> "DmrgSchedule":
        return cls(svd_cutoff=1e-8)

    @classmethod
    def uniform(cls, n_sweeps: int, bond: int, cutoff: float = 1e-12) -> "DmrgSchedule":
        return cls(n_sweeps, [bond] * n_sweeps, cutoff)


@dataclass
class DmrgResult:
    state: MatrixProductState
    energy: float
    sweep_energies: list[float]

    def __iter__(self):
        return iter((self.state, self.energy))


def mpo_inner(a: MatrixProductOperator, b: MatrixProductOperator) -> complex:
    """Hilbert-Schmidt product ``Tr[a^dagger b]``."""
    e = np.ones((1, 1), dtype=np.complex128)
    for x, y in zip(a.tensors, b.tensors):
        e = np.einsum("ab,oiac,oibd->cd", e, x.conj(), y, optimize=True)
    return complex(e[0, 0])


def hermiticity_error(h: MatrixProductOperator) -> float:
    """``||H - H^dagger||_F / ||H||_F`` computed without forming dense matrices."""
    hd = h.dagger()
    nh = mpo_inner(h, h).real
    if nh <= 0:
        return 0.0
    diff = 2 * nh - 2 * mpo_inner(h, hd).real
    return float(np.sqrt(max(diff, 0.0) / nh))


def rms_scale(h: MatrixProductOperator) -> float:
    """``||H||_F / sqrt(2^n)``: the root-mean-square eigenvalue."""
    return float(np.sqrt(max(mpo_inner(h, h).real, 0.0) / 2.0**h.n_sites))


def expectation(psi: MatrixProductState, h: MatrixProductOperator) -> complex:
    e = np.ones((1, 1, 1), dtype=np.complex128)
    for a, w in zip(psi.tensors, h.tensors):
        e = np.einsum("awb,oac,oiwx,ibd->cxd", e, a.conj(), w, a, optimize=True)
    return complex(e[0, 0, 0])


def _is_real(h: MatrixProductOperator) -> bool:
    return all(np.max(np.abs(t.imag), initial=0.0) < 1e-14 for t in h.tensors)


def _random_product(n: int, seed: int, dtype) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    ts = []
    for _ in range(n):
        v = np.array([1.0, 0.0]) + 0.5 * rng.standard_normal(2)
        if dtype == np.complex128:
            v = v + 0.5j * rng.standard_normal(2)
        ts.append((v / np.linalg.norm(v)).astype(dtype).reshape(2, 1, 1))
    return ts


class _Dmrg:
    def __init__(self, h: MatrixProductOperator, below: list[MatrixProductState], schedule: DmrgSchedule,
                 seed: int, weight: float):
        self.n = h.n_sites
        self.dtype = np.float64 if _is_real(h) and all(_is_real_mps(b) for b in below) else np.complex128
        self.w = [t.real.copy() if self.dtype == np.float64 else t for t in h.tensors]
        self.below = [[t.real.copy() if self.dtype == np.float64 else t for t in b.tensors] for b in below]
        self.schedule = schedule
        self.weight = weight
        self.psi = _random_product(self.n, seed, self.dtype)
        # right-canonical start: product states are trivially so after normalization
        self.le: list = [None] * (self.n + 1)
        self.re: list = [None] * (self.n + 1)
        self.lo: list = [[None] * (self.n + 1) for _ in below]
        self.ro: list = [[None] * (self.n + 1) for _ in below]
        one3 = np.ones((1, 1, 1), dtype=self.dtype)
        one2 = np.ones((1, 1), dtype=self.dtype)
        self.le[0] = one3
        self.re[self.n] = one3
        for b in range(len(below)):
            self.lo[b][0] = one2
            self.ro[b][self.n] = one2
        for k in range(self.n - 1, 0, -1):
            self._grow_right(k)

    # environments: le[k] covers sites < k, re[k] covers sites >= k
    def _grow_left(self, k: int) -> None:
        a = self.psi[k]
        self.le[k + 1] = np.einsum("awb,oac,oiwx,ibd->cxd", self.le[k], a.conj(), self.w[k], a, optimize=True)
        for b, phi in enumerate(self.below):
            self.lo[b][k + 1] = np.einsum("ab,sac,sbd->cd", self.lo[b][k], phi[k].conj(), a, optimize=True)

    def _grow_right(self, k: int) -> None:
        a = self.psi[k]
        self.re[k] = np.einsum("cxd,oac,oiwx,ibd->awb", self.re[k + 1], a.conj(), self.w[k], a, optimize=True)
        for b, phi in enumerate(self.below):
            self.ro[b][k] = np.einsum("cd,sac,sbd->ab", self.ro[b][k + 1], phi[k].conj(), a, optimize=True)

    def _projectors(self, k: int) -> list[np.ndarray]:
        out = []
        for b, phi in enumerate(self.below):
            v = np.einsum("ab,sax,txc,cd->stbd", self.lo[b][k].conj(), phi[k], phi[k + 1], self.ro[b][k + 2].conj(),
                          optimize=True)
            out.append(v)
        return out

    def _solve(self, k: int, theta0: np.ndarray) -> tuple[np.ndarray, float]:
        le, re, w1, w2 = self.le[k], self.re[k + 2], self.w[k], self.w[k + 1]
        shape = theta0.shape
        projs = [p.reshape(-1) for p in self._projectors(k)]

        def matvec(v):
            t = v.reshape(shape)
            x = np.tensordot(le, t, ([2], [2]))  # a w i j d
            x = np.tensordot(x, w1, ([1, 2], [2, 1]))  # a j d s y
            x = np.tensordot(x, w2, ([1, 4], [1, 2]))  # a d s t z
            x = np.tensordot(x, re, ([1, 4], [2, 1]))  # a s t c
            y = x.transpose(1, 2, 0, 3).reshape(-1)
            for p in projs:
                y = y + self.weight * p * np.vdot(p, v)
            return y

        dim = theta0.size
        if dim <= DENSE_LOCAL_DIM:
            mat = np.column_stack([matvec(col) for col in np.eye(dim, dtype=self.dtype)])
            mat = 0.5 * (mat + mat.conj().T)
            vals, vecs = np.linalg.eigh(mat)
            return vecs[:, 0].reshape(shape), float(vals[0])
        op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=self.dtype)
        v0 = theta0.reshape(-1)
        if not np.any(v0):
            v0 = None
        vals, vecs = spla.eigsh(op, k=1, which="SA", v0=v0, tol=self.schedule.solver_tol, ncv=min(dim, 20))
        return vecs[:, 0].reshape(shape), float(vals[0])

    def _optimize_bond(self, k: int, max_bond: int, to_right: bool) -> float:
        a, b = self.psi[k], self.psi[k + 1]
        theta = np.einsum("sax,txc->stac", a, b)
        theta, e = self._solve(k, theta)
        res = svd_truncated(theta, [0, 2], cutoff=self.schedule.svd_cutoff, max_bond=max_bond, mode="weight")
        u = res.u  # (s, a, chi)
        vd = res.vdag  # (chi, t, c)
        s = res.s / np.linalg.norm(res.s)
        if to_right:
            self.psi[k] = u.transpose(0, 1, 2)
            self.psi[k + 1] = (s[:, None, None] * vd).transpose(1, 0, 2)
        else:
            self.psi[k] = u * s[None, None, :]
            self.psi[k + 1] = vd.transpose(1, 0, 2)
        return e

    def run(self) -> DmrgResult:
        energies = []
        prev = np.inf
        for sweep, chi in enumerate(self.schedule.max_bond_per_sweep):
            e = 0.0
            for k in range(self.n - 1):
                e = self._optimize_bond(k, chi, to_right=True)
                if k < self.n - 2:
                    self._grow_left(k)
            for k in range(self.n - 2, -1, -1):
                e = self._optimize_bond(k, chi, to_right=False)
                self._grow_right(k + 1)
            energies.append(e)
            log.debug("sweep %d chi %d energy %.12f bonds %s", sweep, chi, e,
                      [t.shape[2] for t in self.psi[:-1]])
            if e > prev + ENERGY_SLACK * max(1.0, abs(prev)):
                log.warning("sweep %d raised the energy from %.12f to %.12f", sweep, prev, e)
            prev = e
        state = MatrixProductState([t.astype(np.complex128) for t in self.psi], "right", 0)
        return DmrgResult(state, energies[-1] if energies else float("nan"), energies)


def _is_real_mps(psi: MatrixProductState) -> bool:
    return all(np.max(np.abs(t.imag), initial=0.0) < 1e-14 for t in psi.tensors)


def _check(h: MatrixProductOperator) -> None:
    err = hermiticity_error(h)
    if err > 1e-10:
        raise ValueError(f"Hamiltonian MPO is not Hermitian (relative error {err:.3e})")


def _single_site(h: MatrixProductOperator, below, weight) -> DmrgResult:
    m = h.tensors[0][:, :, 0, 0]
    for b in below:
        v = b.tensors[0][:, 0, 0]
        m = m + weight * np.outer(v, v.conj())
    vals, vecs = np.linalg.eigh(m)
    psi = MatrixProductState([vecs[:, 0].reshape(2, 1, 1)], "left", 0)
    return DmrgResult(psi, float(expectation(psi, h).real), [float(vals[0])])


def dmrg_ground(h: MatrixProductOperator, schedule: DmrgSchedule | None = None, seed: int = 0) -> DmrgResult:
    """Ground state by two-site DMRG; returns ``(state, energy)`` when unpacked."""
    return dmrg_excited(h, [], schedule, seed)


def dmrg_excited(h: MatrixProductOperator, below: list[MatrixProductState], schedule: DmrgSchedule | None = None,
                 seed: int = 0) -> DmrgResult:
    """Minimize ``<H> + w * sum_b |<b|psi>|^2`` over MPS."""
    schedule = schedule or DmrgSchedule()
    _check(h)
    for b in below:
        if b.n_sites != h.n_sites:
            raise ValueError("states in `below` must match the MPO size")
    below = [b.normalized() for b in below]
    weight = schedule.overlap_penalty_weight
    if weight is None:
        weight = 10.0 * rms_scale(h)
    if h.n_sites == 1:
        return _single_site(h, below, weight)
    res = _Dmrg(h, below, schedule, seed, weight).run()
    # report the bare energy, not the penalized functional
    energy = float(expectation(res.state, h).real)
    overlaps = [abs(inner(b, res.state)) for b in below]
    if overlaps and max(overlaps) > 1e-4:
        log.warning("excited state keeps overlap %.2e with a lower state", max(overlaps))
    return DmrgResult(res.state, energy, res.sweep_energies)
