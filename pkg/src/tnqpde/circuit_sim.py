"""Statevector execution of the phase-difference estimation circuit.

Qubit 0 is the ancilla and the most significant bit, matching the MPS site
order. The circuit is ``U_prep``, ``U_evol^(t/dt)`` on the system qubits,
the phase gate ``P(eps * t)`` on the ancilla, ``U_prep^dagger`` and a
measurement of all zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .brickwall import BrickWallCircuit

NORM_TOL = 1e-9
DENSE_EVOL_QUBITS = 12


@dataclass
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.amplitudes.size != 2**self.n_qubits:
            raise ValueError("amplitude count does not match the qubit count")

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        a = np.zeros(2**n_qubits, dtype=np.complex128)
        a[0] = 1.0
        return cls(n_qubits, a)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self) -> None:
        if abs(self.norm() - 1.0) > NORM_TOL:
            raise ValueError(f"statevector norm drifted to {self.norm()!r}")


@dataclass(frozen=True)
class NoiseSpec:
    p_dep: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_dep <= 1.0:
            raise ValueError("p_dep must lie in [0, 1]")

    def apply(self, p0: float | np.ndarray, n_total: int):
        """Global depolarization seen by the all-zero outcome on ``n_total`` qubits."""
        return (1.0 - self.p_dep) * p0 + self.p_dep / 2.0**n_total


def apply_brickwall(state: Statevector, circuit: BrickWallCircuit, adjoint: bool = False,
                    offset: int = 0) -> Statevector:
    """Apply ``circuit`` (or its adjoint) to qubits ``offset .. offset + n - 1``."""
    if offset < 0 or offset + circuit.n_qubits > state.n_qubits:
        raise ValueError(f"a {circuit.n_qubits}-qubit circuit does not fit a {state.n_qubits}-qubit state at {offset}")
    lead = 2**offset
    rest = 2 ** (state.n_qubits - offset - circuit.n_qubits)
    t = state.amplitudes.reshape(lead, 2**circuit.n_qubits, rest).transpose(1, 0, 2).reshape(2**circuit.n_qubits, -1)
    t = circuit.apply_to(t, adjoint=adjoint)
    out = t.reshape(2**circuit.n_qubits, lead, rest).transpose(1, 0, 2).reshape(-1)
    sv = Statevector(state.n_qubits, out)
    sv.check_norm()
    return sv


def apply_phase(state: Statevector, qubit: int, theta: float) -> Statevector:
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range")
    t = state.amplitudes.reshape(2**qubit, 2, -1).copy()
    t[:, 1, :] *= np.exp(1j * theta)
    return Statevector(state.n_qubits, t.reshape(-1))


def step_count(t: float, dt: float, tol: float = 1e-9) -> int:
    steps = t / dt
    n = int(round(steps))
    if n < 1 or abs(steps - n) > tol * max(1.0, steps):
        raise ValueError(f"t/dt = {steps!r} is not a positive integer")
    return n


def sample_probability(p: float, shots: int, seed: int | np.random.Generator = 0) -> float:
    if not -1e-12 <= p <= 1 + 1e-12:
        raise ValueError("p must lie in [0, 1]")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.binomial(shots, min(max(p, 0.0), 1.0)) / shots


def run_qpde_circuit(prep: BrickWallCircuit, evol: BrickWallCircuit, epsilon: float, t: float, dt: float,
                     noise: NoiseSpec = NoiseSpec()) -> tuple[float, float]:
    """Gate-by-gate simulation; returns ``(ideal, noisy)`` all-zero probabilities."""
    if prep.n_qubits != evol.n_qubits + 1:
        raise ValueError("the preparation circuit needs exactly one more qubit (the ancilla) than the evolution")
    steps = step_count(t, dt)
    n = prep.n_qubits
    psi = apply_brickwall(Statevector.zero(n), prep)
    for _ in range(steps):
        psi = apply_brickwall(psi, evol, offset=1)
    psi = apply_phase(psi, 0, epsilon * t)
    psi = apply_brickwall(psi, prep, adjoint=True)
    p0 = float(abs(psi.amplitudes[0]) ** 2)
    return p0, float(noise.apply(p0, n))


class QpdeSimulator:
    """Evaluates the all-zero probability for many ``eps`` at one ``t``.

    With ``phi = U_prep|0>`` split by ancilla value into ``phi_0, phi_1`` and
    ``psi_k = U_evol^n phi_k``, the amplitude is ``a + exp(i eps t) b`` with
    ``a = <phi_0|psi_0>`` and ``b = <phi_1|psi_1>``.
    """

    def __init__(self, prep: BrickWallCircuit, evol: BrickWallCircuit, dt: float):
        if prep.n_qubits != evol.n_qubits + 1:
            raise ValueError("the preparation circuit needs exactly one more qubit (the ancilla) than the evolution")
        self.prep, self.evol, self.dt = prep, evol, dt
        self.n_total = prep.n_qubits
        phi = prep.apply_to(Statevector.zero(self.n_total).amplitudes)
        self.branches = phi.reshape(2, -1).T.copy()  # columns: ancilla 0, ancilla 1
        self._dense = evol.to_dense() if evol.n_qubits <= DENSE_EVOL_QUBITS else None
        self._cache: dict[int, tuple[complex, complex]] = {}
        # powers reached so far, to extend incrementally
        self._steps_done = 0
        self._evolved = self.branches.copy()

    def amplitudes(self, t: float) -> tuple[complex, complex]:
        steps = step_count(t, self.dt)
        if steps not in self._cache:
            if steps < self._steps_done:
                self._steps_done, self._evolved = 0, self.branches.copy()
            v = self._evolved
            for _ in range(steps - self._steps_done):
                v = self._dense @ v if self._dense is not None else self.evol.apply_to(v)
            self._steps_done, self._evolved = steps, v
            a = complex(np.vdot(self.branches[:, 0], v[:, 0]))
            b = complex(np.vdot(self.branches[:, 1], v[:, 1]))
            self._cache[steps] = (a, b)
        return self._cache[steps]

    def probabilities(self, epsilons, t: float, noise: NoiseSpec = NoiseSpec()) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.amplitudes(t)
        eps = np.asarray(epsilons, dtype=float)
        p0 = np.abs(a + np.exp(1j * eps * t) * b) ** 2
        return p0, noise.apply(p0, self.n_total)
