"""Brick-wall circuits of nearest-neighbour two-qubit gates.

Layers are 0-indexed here. Layer ``l`` holds gates on qubit pairs ``(q, q+1)``
with ``q = l % 2, l % 2 + 2, ...``; in 1-indexed terms odd layers act on
(1,2),(3,4),... and even layers on (2,3),(4,5),.... A gate is a 4x4 matrix
``G[(oa, ob), (ia, ib)]`` with ``a`` the lower-numbered qubit, matching the
big-endian Kronecker ordering used everywhere else. Layer 0 acts first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil
from pathlib import Path

import numpy as np

from .tensor_core import is_unitary, random_near_identity_unitary


def layer_pairs(n_qubits: int, layer: int) -> list[int]:
    """Left qubits of the gates in ``layer``."""
    return list(range(layer % 2, n_qubits - 1, 2))


@dataclass
class BrickWallCircuit:
    n_qubits: int
    gates: dict[tuple[int, int], np.ndarray]
    depth: int

    def __post_init__(self):
        if self.n_qubits < 2 or self.depth < 1:
            raise ValueError("need n_qubits >= 2 and depth >= 1")
        expected = {(l, q) for l in range(self.depth) for q in layer_pairs(self.n_qubits, l)}
        if set(self.gates) != expected:
            raise ValueError("gate positions do not match the brick-wall layout")
        self.gates = {k: np.asarray(v, dtype=np.complex128).reshape(4, 4) for k, v in self.gates.items()}

    def positions(self) -> list[tuple[int, int]]:
        return [(l, q) for l in range(self.depth) for q in layer_pairs(self.n_qubits, l)]

    @property
    def n_gates(self) -> int:
        return len(self.gates)

    def copy(self) -> "BrickWallCircuit":
        return BrickWallCircuit(self.n_qubits, {k: v.copy() for k, v in self.gates.items()}, self.depth)

    def check_unitary(self, atol: float = 1e-10) -> bool:
        return all(is_unitary(g, atol) for g in self.gates.values())

    def apply_to(self, psi: np.ndarray, adjoint: bool = False) -> np.ndarray:
        """Apply the circuit to ``psi`` of shape ``(2**n,)`` or ``(2**n, batch)``."""
        n = self.n_qubits
        batch = psi.shape[1:] if psi.ndim > 1 else ()
        t = np.asarray(psi, dtype=np.complex128).reshape((2,) * n + batch)
        layers = range(self.depth - 1, -1, -1) if adjoint else range(self.depth)
        for l in layers:
            for q in layer_pairs(n, l):
                g = self.gates[(l, q)]
                t = apply_two_qubit(t, g.conj().T if adjoint else g, q)
        return t.reshape((2**n,) + batch)

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > 12:
            raise ValueError("dense circuit matrices are limited to 12 qubits")
        dim = 2**self.n_qubits
        return self.apply_to(np.eye(dim, dtype=np.complex128))

    def to_json(self) -> str:
        entries = []
        for (l, q), g in sorted(self.gates.items()):
            entries.append({"layer": l, "position": q, "real": g.real.tolist(), "imag": g.imag.tolist()})
        return json.dumps({"n_qubits": self.n_qubits, "depth": self.depth, "gates": entries})

    @classmethod
    def from_json(cls, text: str) -> "BrickWallCircuit":
        d = json.loads(text)
        gates = {
            (int(e["layer"]), int(e["position"])): np.array(e["real"]) + 1j * np.array(e["imag"])
            for e in d["gates"]
        }
        return cls(int(d["n_qubits"]), gates, int(d["depth"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "BrickWallCircuit":
        return cls.from_json(Path(path).read_text())


def apply_two_qubit(t: np.ndarray, g: np.ndarray, q: int) -> np.ndarray:
    """Apply a 4x4 gate to axes ``q, q+1`` of a state tensor (extra trailing axes allowed)."""
    g4 = g.reshape(2, 2, 2, 2)
    out = np.tensordot(g4, t, axes=([2, 3], [q, q + 1]))
    return np.moveaxis(out, (0, 1), (q, q + 1))


def init_circuit(n_qubits: int, depth: int, scale: float = 0.01, seed: int = 0) -> BrickWallCircuit:
    """Near-identity gates: QR of identity plus a small random perturbation."""
    rng = np.random.default_rng(seed)
    gates = {}
    for l in range(depth):
        for q in layer_pairs(n_qubits, l):
            gates[(l, q)] = random_near_identity_unitary(4, scale, rng)
    return BrickWallCircuit(n_qubits, gates, depth)


def two_qubit_gate_count(n: int, d_prep: int, d_evol: int, steps: int) -> int:
    """Upper bound on native two-qubit gates for one QPDE circuit.

    ``3 * (n * ceil(d_prep/2) * 2 + (n-1) * ceil(d_evol/2) * steps)``; the two
    applications of the preparation circuit act on ``n + 1`` qubits.
    """
    return 3 * (n * ceil(d_prep / 2) * 2 + (n - 1) * ceil(d_evol / 2) * steps)
