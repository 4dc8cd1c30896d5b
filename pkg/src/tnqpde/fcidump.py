"""Molecular active-space integrals: FCIDUMP ingestion and qubit mapping."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .hamiltonian import PRUNE_TOL, QubitHamiltonian, jordan_wigner

SYMMETRY_TOL = 1e-10


class FcidumpError(ValueError):
    pass


@dataclass
class FermionicIntegrals:
    """Spatial-orbital integrals in chemists' notation, 0-based indices."""

    n_orb: int
    n_elec: int
    one_body: np.ndarray  # h[p, q]
    two_body: np.ndarray  # eri[p, q, r, s] = (pq|rs)
    core_energy: float = 0.0
    ms2: int = 0

    def __post_init__(self):
        n = self.n_orb
        self.one_body = np.asarray(self.one_body, dtype=float)
        self.two_body = np.asarray(self.two_body, dtype=float)
        if self.one_body.shape != (n, n) or self.two_body.shape != (n,) * 4:
            raise ValueError("integral shapes do not match n_orb")
        if not np.allclose(self.one_body, self.one_body.T, atol=SYMMETRY_TOL, rtol=0):
            raise ValueError("one-body integrals are not symmetric")
        g = self.two_body
        for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
            if not np.allclose(g, g.transpose(perm), atol=SYMMETRY_TOL, rtol=0):
                raise ValueError("two-body integrals lack the 8-fold symmetry")

    def permuted(self, perm) -> "FermionicIntegrals":
        """Integrals with orbital ``perm[k]`` moved to position ``k``."""
        p = np.asarray(perm)
        h = self.one_body[np.ix_(p, p)]
        g = self.two_body[np.ix_(p, p, p, p)]
        return FermionicIntegrals(self.n_orb, self.n_elec, h, g, self.core_energy, self.ms2)


_HEADER_KEY = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z0-9_]+\s*=|$)")


def _parse_header(text: str) -> dict[str, list[str]]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.IGNORECASE)
    out = {}
    for key, val in _HEADER_KEY.findall(body.replace("\n", " ")):
        out[key.upper()] = [v for v in re.split(r"[,\s]+", val.strip()) if v]
    return out


def parse_fcidump(path: str | Path) -> FermionicIntegrals:
    """Read a Molpro-format FCIDUMP file.

    Records ``x i j k l`` with all indices positive are ``(ij|kl)``;
    ``x i j 0 0`` is ``h_ij``; ``x 0 0 0 0`` is the core energy; records with
    only ``i`` nonzero (orbital energies) are ignored. Missing symmetric
    partners are filled in and conflicting ones rejected.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].lstrip().upper().startswith("&FCI"):
        raise FcidumpError(f"{path}:1: missing &FCI header")
    end = None
    for i, line in enumerate(lines):
        s = line.strip().upper()
        if s.endswith("&END") or s == "/" or s.endswith("/"):
            end = i
            break
    if end is None:
        raise FcidumpError(f"{path}: header is not terminated by &END or /")
    header = _parse_header("\n".join(lines[: end + 1]))
    try:
        n = int(header["NORB"][0])
        nelec = int(header["NELEC"][0])
        ms2 = int(header.get("MS2", ["0"])[0])
    except (KeyError, ValueError, IndexError) as exc:
        raise FcidumpError(f"{path}: malformed header ({exc})") from None
    if n < 1:
        raise FcidumpError(f"{path}: NORB must be positive")
    h = np.full((n, n), np.nan)
    g = np.full((n,) * 4, np.nan)
    core = 0.0

    def put(arr, idx, val, lineno):
        old = arr[idx]
        if not np.isnan(old) and abs(old - val) > SYMMETRY_TOL:
            raise FcidumpError(f"{path}:{lineno}: value {val} conflicts with symmetric partner {old}")
        arr[idx] = val

    for lineno, line in enumerate(lines[end + 1:], start=end + 2):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FcidumpError(f"{path}:{lineno}: expected 'value i j k l'")
        try:
            val = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in fields[1:])
        except ValueError:
            raise FcidumpError(f"{path}:{lineno}: non-real value or non-integer index") from None
        if not np.isfinite(val):
            raise FcidumpError(f"{path}:{lineno}: non-finite value")
        if any(x < 0 or x > n for x in (i, j, k, l)):
            raise FcidumpError(f"{path}:{lineno}: index out of range 0..{n}")
        if i and j and k and l:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in {(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                               (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)}:
                put(g, (a, b, c, d), val, lineno)
        elif i and j and not k and not l:
            put(h, (i - 1, j - 1), val, lineno)
            put(h, (j - 1, i - 1), val, lineno)
        elif not (i or j or k or l):
            core = val
        elif i and not (j or k or l):
            continue
        else:
            raise FcidumpError(f"{path}:{lineno}: unsupported index pattern {i} {j} {k} {l}")
    h = np.nan_to_num(h, nan=0.0)
    g = np.nan_to_num(g, nan=0.0)
    try:
        return FermionicIntegrals(n, nelec, h, g, core, ms2)
    except ValueError as exc:
        raise FcidumpError(f"{path}: {exc}") from None


def write_fcidump(ints: FermionicIntegrals, path: str | Path, tol: float = 1e-14) -> None:
    n = ints.n_orb
    out = [f"&FCI NORB={n},NELEC={ints.n_elec},MS2={ints.ms2},", " ORBSYM=" + "1," * n, " ISYM=1,", "&END"]
    g = ints.two_body
    for i, j, k, l in product(range(n), repeat=4):
        if i >= j and k >= l and i * (i + 1) // 2 + j >= k * (k + 1) // 2 + l and abs(g[i, j, k, l]) > tol:
            out.append(f"{g[i, j, k, l]:.16e} {i + 1} {j + 1} {k + 1} {l + 1}")
    for i in range(n):
        for j in range(i + 1):
            if abs(ints.one_body[i, j]) > tol:
                out.append(f"{ints.one_body[i, j]:.16e} {i + 1} {j + 1} 0 0")
    out.append(f"{ints.core_energy:.16e} 0 0 0 0")
    Path(path).write_text("\n".join(out) + "\n")


def exchange_matrix(ints: FermionicIntegrals) -> np.ndarray:
    """``K_ij = (ij|ji)`` over spatial orbitals."""
    n = ints.n_orb
    idx = np.arange(n)
    k = ints.two_body[idx[:, None], idx[None, :], idx[None, :], idx[:, None]]
    return 0.5 * (k + k.T)


def fermion_terms(ints: FermionicIntegrals, tol: float = 1e-14):
    """Second-quantized ``H`` over interleaved spin orbitals, mode ``2 p + sigma``."""
    n = ints.n_orb
    terms = []
    if ints.core_energy:
        terms.append((ints.core_energy, []))
    for p, q in product(range(n), repeat=2):
        c = ints.one_body[p, q]
        if abs(c) > tol:
            for s in (0, 1):
                terms.append((c, [(2 * p + s, True), (2 * q + s, False)]))
    for p, q, r, s in product(range(n), repeat=4):
        c = 0.5 * ints.two_body[p, q, r, s]
        if abs(c) <= tol:
            continue
        for a, b in product((0, 1), repeat=2):
            mp, mr = 2 * p + a, 2 * r + b
            if mp == mr:
                continue  # a^dag a^dag on one mode vanishes
            terms.append((c, [(mp, True), (mr, True), (2 * s + b, False), (2 * q + a, False)]))
    return terms


def integrals_to_qubit_hamiltonian(ints: FermionicIntegrals, perm=None, tol: float = PRUNE_TOL) -> QubitHamiltonian:
    """Reorder orbitals by ``perm`` (``perm[position] = orbital``) and JW-map."""
    if perm is not None:
        perm = list(perm)
        if sorted(perm) != list(range(ints.n_orb)):
            raise ValueError("perm is not a permutation of the orbitals")
        ints = ints.permuted(perm)
    return jordan_wigner(fermion_terms(ints), 2 * ints.n_orb, tol)
