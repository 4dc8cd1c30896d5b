"""Qubit Hamiltonians: Pauli-string algebra, Jordan-Wigner mapping, 1D Hubbard.

Qubit ``k`` is the ``k``-th character of a Pauli label and the ``k``-th factor of
the Kronecker product, i.e. qubit 0 is the most significant bit of a
computational-basis index. Fermionic modes are spin orbitals interleaved
up/down: spatial orbital ``p`` with spin ``sigma`` (0 = up, 1 = down) is mode
``2 p + sigma`` and maps to qubit ``2 p + sigma``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

PRUNE_TOL = 1e-12
MAX_DENSE_QUBITS = 14

# A fermion term is (coefficient, [(mode, is_creation), ...]) read left to right.
FermionTerm = tuple[float, Sequence[tuple[int, bool]]]


@dataclass(frozen=True)
class PauliTerm:
    coefficient: float
    string: str

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError("Pauli coefficient must be finite")
        if set(self.string) - set("IXYZ"):
            raise ValueError(f"invalid Pauli label {self.string!r}")

    @property
    def support(self) -> list[int]:
        return [k for k, c in enumerate(self.string) if c != "I"]


@dataclass
class QubitHamiltonian:
    n_qubits: int
    terms: list[PauliTerm] = field(default_factory=list)

    def __post_init__(self):
        for t in self.terms:
            if len(t.string) != self.n_qubits:
                raise ValueError(f"label {t.string!r} does not have {self.n_qubits} qubits")

    def __len__(self) -> int:
        return len(self.terms)

    def constant(self) -> float:
        return sum(t.coefficient for t in self.terms if set(t.string) <= {"I"})

    def norm_scale(self) -> float:
        """Sum of absolute coefficients; an upper bound on the operator norm."""
        return float(sum(abs(t.coefficient) for t in self.terms))

    def without_zero_terms(self, tol: float = 0.0) -> "QubitHamiltonian":
        return QubitHamiltonian(self.n_qubits, [t for t in self.terms if abs(t.coefficient) > tol])

    def to_sparse(self) -> sp.csr_matrix:
        if self.n_qubits > MAX_DENSE_QUBITS:
            raise ValueError(f"explicit matrices are limited to {MAX_DENSE_QUBITS} qubits")
        dim = 2**self.n_qubits
        out = sp.csr_matrix((dim, dim), dtype=np.complex128)
        for t in self.terms:
            out = out + t.coefficient * pauli_sparse(t.string)
        return out

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def diagonal_element(self, bits: Sequence[int]) -> float:
        """<bits|H|bits> for a computational basis state."""
        val = 0.0
        for t in self.terms:
            if any(c in "XY" for c in t.string):
                continue
            sign = 1
            for c, b in zip(t.string, bits):
                if c == "Z" and b:
                    sign = -sign
            val += sign * t.coefficient
        return val

    def to_json(self) -> str:
        return json.dumps(
            {"n_qubits": self.n_qubits, "terms": [[t.coefficient, t.string] for t in self.terms]},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "QubitHamiltonian":
        d = json.loads(text)
        return cls(int(d["n_qubits"]), [PauliTerm(float(c), s) for c, s in d["terms"]])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "QubitHamiltonian":
        return cls.from_json(Path(path).read_text())


# --- symplectic Pauli algebra -------------------------------------------------
# An operator X^x Z^z is stored as the pair of bitmasks (x, z) with bit k for
# qubit k; X^x Z^z = (-i)^{popcount(x & z)} * (Pauli label with Y where x=z=1).


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _xz_product(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int, int]:
    """X^x1 Z^z1 X^x2 Z^z2 = sign * X^(x1^x2) Z^(z1^z2); returns (x, z, sign)."""
    sign = -1 if _popcount(a[1] & b[0]) & 1 else 1
    return a[0] ^ b[0], a[1] ^ b[1], sign


def label_to_xz(label: str) -> tuple[int, int, complex]:
    """Masks and phase with ``label = phase * X^x Z^z``."""
    x = z = 0
    ny = 0
    for k, c in enumerate(label):
        if c in "XY":
            x |= 1 << k
        if c in "ZY":
            z |= 1 << k
        if c == "Y":
            ny += 1
    return x, z, 1j**ny


def xz_to_label(x: int, z: int, n: int) -> tuple[str, complex]:
    """Label and phase with ``X^x Z^z = phase * label``."""
    chars = []
    ny = 0
    for k in range(n):
        bx, bz = (x >> k) & 1, (z >> k) & 1
        if bx and bz:
            chars.append("Y")
            ny += 1
        elif bx:
            chars.append("X")
        elif bz:
            chars.append("Z")
        else:
            chars.append("I")
    return "".join(chars), (-1j) ** ny


def pauli_sparse(label: str) -> sp.csr_matrix:
    n = len(label)
    dim = 2**n
    x, z, phase = label_to_xz(label)
    # basis index bit (n-1-k) belongs to qubit k
    xb = sum(1 << (n - 1 - k) for k in range(n) if (x >> k) & 1)
    zb = sum(1 << (n - 1 - k) for k in range(n) if (z >> k) & 1)
    cols = np.arange(dim)
    parity = np.zeros(dim, dtype=np.int64)
    v = cols & zb
    while np.any(v):
        parity ^= v & 1
        v = v >> 1
    data = phase * (1.0 - 2.0 * parity)
    rows = cols ^ xb
    return sp.csr_matrix((data.astype(np.complex128), (rows, cols)), shape=(dim, dim))


def pauli_matrix(label: str) -> np.ndarray:
    return pauli_sparse(label).toarray()


class PauliSum:
    """Accumulator for complex linear combinations of X^x Z^z monomials.

    Insertion order of first appearance is kept so the resulting term list is
    deterministic.
    """

    def __init__(self, n: int):
        self.n = n
        self.coeffs: dict[tuple[int, int], complex] = {}

    def add(self, x: int, z: int, c: complex) -> None:
        key = (x, z)
        self.coeffs[key] = self.coeffs.get(key, 0.0) + c

    def to_hamiltonian(self, tol: float = PRUNE_TOL, check_hermitian: bool = True) -> QubitHamiltonian:
        terms = []
        for (x, z), c in self.coeffs.items():
            label, phase = xz_to_label(x, z, self.n)
            coeff = c * phase
            if abs(coeff) <= tol:
                continue
            if check_hermitian and abs(coeff.imag) > 1e-10:
                raise ValueError(f"non-Hermitian result: term {label} has coefficient {coeff}")
            terms.append(PauliTerm(float(coeff.real), label))
        return QubitHamiltonian(self.n, terms)


def _ladder(mode: int, creation: bool) -> list[tuple[int, int, complex]]:
    """JW image of a_mode (or a_mode^dagger) as X^x Z^z monomials."""
    chain = (1 << mode) - 1
    b = 1 << mode
    # a = Zchain (X + iY)/2 = Zchain (X - X Z)/2 ; a^dag = Zchain (X + X Z)/2
    s = 0.5 if creation else -0.5
    return [(b, chain, 0.5), (b, chain | b, s)]


def jordan_wigner(fermion_terms: Iterable[FermionTerm], n_modes: int, tol: float = PRUNE_TOL) -> QubitHamiltonian:
    """Map products of ladder operators to a qubit Hamiltonian.

    Raises ``ValueError`` when the mapped operator has a non-real Pauli
    coefficient, i.e. when the input sum is not Hermitian.
    """
    acc = PauliSum(n_modes)
    for coeff, ops in fermion_terms:
        current = [(0, 0, complex(coeff))]
        for mode, creation in ops:
            if not 0 <= mode < n_modes:
                raise ValueError(f"mode {mode} out of range for {n_modes} modes")
            nxt: dict[tuple[int, int], complex] = {}
            for x1, z1, c1 in current:
                for x2, z2, c2 in _ladder(mode, creation):
                    x, z, sign = _xz_product((x1, z1), (x2, z2))
                    nxt[(x, z)] = nxt.get((x, z), 0.0) + sign * c1 * c2
            current = [(x, z, c) for (x, z), c in nxt.items() if c != 0]
        for x, z, c in current:
            acc.add(x, z, c)
    return acc.to_hamiltonian(tol)


def hubbard_fermion_terms(n_s: int, T: float = 1.0, U: float = 10.0) -> list[FermionTerm]:
    terms: list[FermionTerm] = []
    for q in range(n_s - 1):
        for sigma in (0, 1):
            a, b = 2 * q + sigma, 2 * (q + 1) + sigma
            terms.append((-T, [(b, True), (a, False)]))
            terms.append((-T, [(a, True), (b, False)]))
    for q in range(n_s):
        up, dn = 2 * q, 2 * q + 1
        terms.append((U, [(up, True), (up, False), (dn, True), (dn, False)]))
    for q in range(n_s):
        for sigma in (0, 1):
            m = 2 * q + sigma
            terms.append((-U / 2, [(m, True), (m, False)]))
    return terms


def hubbard_1d(n_s: int, T: float = 1.0, U: float = 10.0) -> QubitHamiltonian:
    """Open-chain 1D Hubbard model with the -U/2 number shift, JW-mapped."""
    if n_s < 1:
        raise ValueError("n_s must be >= 1")
    return jordan_wigner(hubbard_fermion_terms(n_s, T, U), 2 * n_s)


def exact_spectrum(h: QubitHamiltonian, k: int = 1) -> np.ndarray:
    """Lowest ``k`` eigenvalues, ascending."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"exact diagonalization is limited to {MAX_DENSE_QUBITS} qubits")
    dim = 2**h.n_qubits
    k = min(k, dim)
    if dim <= 1024 or k >= dim - 1:
        return np.linalg.eigvalsh(h.to_dense())[:k]
    vals = spla.eigsh(h.to_sparse(), k=k, which="SA", tol=1e-12, return_eigenvectors=False)
    return np.sort(vals.real)


def exact_eigh(h: QubitHamiltonian, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs (columns of the second array)."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"exact diagonalization is limited to {MAX_DENSE_QUBITS} qubits")
    dim = 2**h.n_qubits
    if dim <= 1024:
        w, v = np.linalg.eigh(h.to_dense())
        return w[:k], v[:, :k]
    w, v = spla.eigsh(h.to_sparse(), k=k, which="SA", tol=1e-12)
    order = np.argsort(w.real)
    return w.real[order], v[:, order]
