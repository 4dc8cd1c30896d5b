"""Polar-update compression of brick-wall circuits against MPO/MPS targets.

The optimized objective is ``F(C) = Tr[A C]`` where ``A`` is an MPO: ``A =
U_ref^dagger`` for time evolution and ``A = |0...0><MPS|`` for state
preparation. Closing the trace turns every qubit into a loop: the circuit
input of qubit ``p`` is joined to the ``out`` leg of ``A[p]`` and the circuit
output to its ``in`` leg.

Environments
------------
``L[p]`` contracts everything living on qubits ``0..p`` together with the
gates on ``(p, p+1)``. Those gates stick out to the right through qubit
``p+1``; each contributes one open leg of dimension 4 holding the (input,
output) wire indices of qubit ``p+1`` at that gate, ordered by layer.
``R[p]`` mirrors this for qubits ``p..n-1`` plus the gates on ``(p-1, p)``,
exposing qubit ``p-1`` wire legs. Both carry the MPO bond as the leading axis.

For the gate column on ``(q, q+1)`` we thread qubit ``q`` through
``L[q-1]`` and ``A[q]`` (giving ``PL``) and qubit ``q+1`` through ``A[q+1]``
and ``R[q+2]`` (giving ``PR``), cutting each wire at the column's own gates.
Then ``F = sum PL * PR * prod(G)``. Absorbing gates into ``PL`` converts
qubit-``q`` legs into qubit-``q+1`` legs and vice versa for ``PR``, so every
tensor keeps size ``chi * 4**m`` with ``m ~ d/2`` the number of gates in the
column. The environment of one gate is ``PL`` with the gates below absorbed,
contracted with ``PR`` with the gates above absorbed.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .brickwall import BrickWallCircuit, init_circuit
from .mpo import MatrixProductOperator
from .mps import MatrixProductState
from .tensor_core import polar_unitary

log = logging.getLogger(__name__)

_ONE = np.ones((1, 1), dtype=np.complex128)
_EYE2 = np.eye(2, dtype=np.complex128)

MONOTONE_TOL = 1e-9


class MonotonicityError(RuntimeError):
    """A polar update lowered the objective by more than the tolerance."""


def _thread(env: np.ndarray, ops: list, w: np.ndarray, side: str, counter: list | None = None) -> np.ndarray:
    """Run one qubit wire through an environment and close it with MPO tensor ``w``.

    ``env`` has shape ``(chi, 4**m_in)``; ``ops[l]`` is ``"join"`` (consume the
    next incoming leg: the wire enters at its input index and leaves at its
    output index), ``"cut"`` (emit a new leg holding the wire's input/output at
    layer ``l``) or ``None``. ``side`` tells which MPO bond of ``w`` is shared
    with ``env``; the other one becomes the leading axis of the result.
    """
    chi = env.shape[0]
    # t axes: (chi, Kin_remaining, Kout, x0, wire)
    t = env.reshape(chi, env.shape[1], 1, 1, 1) * _EYE2.reshape(1, 1, 1, 2, 2)
    for op in ops:
        c, kin, kout = t.shape[0], t.shape[1], t.shape[2]
        if op == "join":
            t6 = t.reshape(c, 2, 2, kin // 4, kout, 2, 2)
            # wire must match the leg's input index; the leg's output continues
            t = np.einsum("aiobcxi->abcxo", t6).copy()
        elif op == "cut":
            t = np.einsum("abcxi,ow->abcioxw", t, _EYE2).reshape(c, kin, kout * 4, 2, 2)
        if counter is not None:
            counter[0] += t.size
    t = t.reshape(chi, t.shape[2], 2, 2)
    if side == "left":
        out = np.einsum("akxw,xwab->bk", t, w, optimize=True)
    else:
        out = np.einsum("bkxw,xwab->ak", t, w, optimize=True)
    if counter is not None:
        counter[0] += t.size * w.shape[3 if side == "left" else 2]
    return out


def _absorb(p: np.ndarray, g: np.ndarray, leg: int, into: str, counter: list | None = None) -> np.ndarray:
    """Absorb gate ``g`` at column leg ``leg`` of ``PL`` (``into="left"``) or ``PR``."""
    m = p.ndim - 1
    shape = p.shape
    g4 = g.reshape(2, 2, 2, 2)  # (oa, ob, ia, ib)
    if into == "left":
        mat = g4.transpose(2, 0, 3, 1).reshape(4, 4)  # (ia,oa) -> (ib,ob)
    else:
        mat = g4.transpose(3, 1, 2, 0).reshape(4, 4)  # (ib,ob) -> (ia,oa)
    moved = np.moveaxis(p, leg + 1, -1)
    out = np.moveaxis(moved @ mat, -1, leg + 1)
    if counter is not None:
        counter[0] += p.size * 4
    assert out.shape == shape and m >= 1
    return out


def _gate_env_raw(pl: np.ndarray, pr: np.ndarray, leg: int, counter: list | None = None) -> np.ndarray:
    """``X[(oa,ob),(ia,ib)] = dF/dG`` from the two half-environments."""
    m = pl.ndim - 1
    axes = [0] + [k + 1 for k in range(m) if k != leg]
    e = np.tensordot(pl, pr, axes=(axes, axes))  # (ia,oa) x (ib,ob)
    if counter is not None:
        counter[0] += pl.size * 4
    return e.reshape(2, 2, 2, 2).transpose(1, 3, 0, 2).reshape(4, 4)


@dataclass
class EnvironmentCache:
    """Left/right environments of the current sweep plus bookkeeping.

    ``left[p]`` / ``right[p]`` hold ``L[p]`` / ``R[p]`` (shape ``(chi,
    4**m)``), or ``None`` when stale. With ``debug`` set, every cached
    objective is compared with a from-scratch contraction.
    """

    left: dict = field(default_factory=dict)
    right: dict = field(default_factory=dict)
    debug: bool = False
    contraction_count: int = 0


class _Network:
    """Trace network ``Tr[A C]`` over a brick-wall circuit ``C``."""

    def __init__(self, circuit: BrickWallCircuit, a: MatrixProductOperator, cache: EnvironmentCache | None = None):
        if a.n_sites != circuit.n_qubits:
            raise ValueError(f"target has {a.n_sites} sites, circuit has {circuit.n_qubits} qubits")
        for t in a.tensors:
            if t.shape[:2] != (2, 2):
                raise ValueError("target MPO must have qubit physical legs")
        self.c = circuit
        self.w = a.tensors
        self.n = circuit.n_qubits
        self.d = circuit.depth
        self.cache = cache if cache is not None else EnvironmentCache()
        self._counter = [0]

    # ---- structure -------------------------------------------------------
    def column_layers(self, q: int) -> list[int]:
        return [l for l in range(self.d) if l % 2 == q % 2 and q + 1 < self.n] if q >= 0 else []

    def _ops(self, p: int, col: int) -> list:
        """Wire ops for qubit ``p`` when the active column is ``(col, col+1)``."""
        ops = []
        for l in range(self.d):
            if l % 2 == col % 2:
                ops.append("cut")
            elif (p == col and p >= 1) or (p == col + 1 and p + 1 < self.n):
                ops.append("join")
            else:
                ops.append(None)
        return ops

    def _left_env(self, p: int) -> np.ndarray:
        return _ONE if p < 0 else self.cache.left[p]

    def _right_env(self, p: int) -> np.ndarray:
        return _ONE if p >= self.n else self.cache.right[p]

    def halves(self, q: int) -> tuple[np.ndarray, np.ndarray]:
        """``PL``, ``PR`` for column ``(q, q+1)`` reshaped to ``(chi, 4, ..., 4)``."""
        m = len(self.column_layers(q))
        pl = _thread(self._left_env(q - 1), self._ops(q, q), self.w[q], "left", self._counter)
        pr = _thread(self._right_env(q + 2), self._ops(q + 1, q), self.w[q + 1], "right", self._counter)
        return pl.reshape((pl.shape[0],) + (4,) * m), pr.reshape((pr.shape[0],) + (4,) * m)

    def _absorb_all(self, p: np.ndarray, q: int, into: str) -> np.ndarray:
        for j, l in enumerate(self.column_layers(q)):
            p = _absorb(p, self.c.gates[(l, q)], j, into, self._counter)
        return p

    def build_right(self) -> None:
        """Rebuild ``R[p]`` for ``p = n-1 .. 1`` from the current gates."""
        self.cache.right = {}
        for p in range(self.n - 1, 0, -1):
            q = p - 1
            pr = _thread(self._right_env(p + 1), self._ops(p, q), self.w[p], "right", self._counter)
            m = len(self.column_layers(q))
            pr = self._absorb_all(pr.reshape((pr.shape[0],) + (4,) * m), q, "right")
            self.cache.right[p] = pr.reshape(pr.shape[0], -1)

    def set_left(self, q: int, pl_full: np.ndarray) -> None:
        self.cache.left[q] = pl_full.reshape(pl_full.shape[0], -1)

    def objective_from_scratch(self) -> complex:
        """``Tr[A C]`` contracted with fresh environments (cache untouched)."""
        saved = (self.cache.left, self.cache.right)
        try:
            self.cache.left = {}
            self.build_right()
            pl, pr = self.halves(0)
            pl = self._absorb_all(pl, 0, "left")
            return complex(np.sum(pl * pr))
        finally:
            self.cache.left, self.cache.right = saved

    # ---- one column ------------------------------------------------------
    def optimize_column(self, q: int, upward: bool, record: list, update: bool = True) -> complex:
        layers = self.column_layers(q)
        pl, pr = self.halves(q)
        m = len(layers)
        f = complex(np.sum(self._absorb_all(pl, q, "left") * pr)) if m == 0 else 0j
        if m == 0:
            self.set_left(q, pl)
            return f
        if upward:
            pr_up = [None] * m
            pr_up[m - 1] = pr
            for j in range(m - 2, -1, -1):
                pr_up[j] = _absorb(pr_up[j + 1], self.c.gates[(layers[j + 1], q)], j + 1, "right", self._counter)
            cur = pl
            for j in range(m):
                f = self._update(cur, pr_up[j], j, (layers[j], q), record, update)
                cur = _absorb(cur, self.c.gates[(layers[j], q)], j, "left", self._counter)
            self.set_left(q, cur)
        else:
            pl_low = [None] * m
            pl_low[0] = pl
            for j in range(1, m):
                pl_low[j] = _absorb(pl_low[j - 1], self.c.gates[(layers[j - 1], q)], j - 1, "left", self._counter)
            cur = pr
            for j in range(m - 1, -1, -1):
                f = self._update(pl_low[j], cur, j, (layers[j], q), record, update)
                cur = _absorb(cur, self.c.gates[(layers[j], q)], j, "right", self._counter)
            # the lower gates changed during the pass, so rebuild from scratch
            self.set_left(q, self._absorb_all(pl, q, "left"))
        return f

    def _update(self, pl, pr, leg, key, record, update) -> complex:
        x = _gate_env_raw(pl, pr, leg, self._counter)
        g_old = self.c.gates[key]
        f_old = complex(np.sum(x * g_old))
        if not update:
            return f_old
        g_new = polar_unitary(np.conj(x))
        f_new = complex(np.sum(x * g_new))
        scale = max(1.0, abs(f_old))
        if f_new.real < f_old.real - MONOTONE_TOL * scale:
            raise MonotonicityError(f"gate {key}: objective fell from {f_old.real!r} to {f_new.real!r}")
        record.append(f_new.real - f_old.real)
        self.c.gates[key] = g_new
        return f_new

    def sweep(self, record: list) -> complex:
        self.build_right()
        self.cache.left = {}
        f = 0j
        for q in range(self.n - 1):
            f = self.optimize_column(q, upward=(q % 2 == 0), record=record)
        self.cache.contraction_count = self._counter[0]
        if self.cache.debug:
            ref = self.objective_from_scratch()
            if abs(ref - f) > 1e-8 * max(1.0, abs(ref)):
                raise AssertionError(f"cached objective {f} disagrees with from-scratch {ref}")
        return f


@dataclass
class CompressionResult:
    circuit: BrickWallCircuit
    objective_history: list[float]
    update_deltas: list[float]
    sweeps_run: int
    contraction_count: int

    def __iter__(self):
        # allows ``circuit, history = compress_to_mpo(...)``
        return iter((self.circuit, self.objective_history))


def _run(circuit: BrickWallCircuit, a: MatrixProductOperator, n_sweeps: int, early_stop: int = 20,
         tol: float = 1e-12, debug: bool = False, callback=None) -> CompressionResult:
    c = circuit.copy()
    net = _Network(c, a, EnvironmentCache(debug=debug))
    history: list[float] = []
    deltas: list[float] = []
    stalled = 0
    sweeps = 0
    for s in range(n_sweeps):
        f = net.sweep(deltas).real
        sweeps += 1
        if history and (f - history[-1]) < tol * max(1.0, abs(f)):
            stalled += 1
        else:
            stalled = 0
        history.append(f)
        if callback is not None:
            callback(s, f)
        if early_stop and stalled >= early_stop:
            log.info("early stop after %d sweeps (objective %.12g)", sweeps, f)
            break
    return CompressionResult(c, history, deltas, sweeps, net.cache.contraction_count)


@dataclass
class MultistartConfig:
    """Run ``n_starts`` random initializations briefly, then continue the best.

    Independent near-identity starts fall into distinct local optima; the
    objective after ``warmup`` sweeps already ranks them reliably.
    """

    n_starts: int = 4
    warmup: int = 100
    init_scale: float = 0.01

    def __post_init__(self):
        if self.n_starts < 1 or self.warmup < 0:
            raise ValueError("n_starts must be >= 1 and warmup >= 0")


def compress_multistart(n_qubits: int, depth: int, a: MatrixProductOperator, n_sweeps: int, seed: int = 0,
                        config: MultistartConfig | None = None, early_stop: int = 20,
                        callback=None) -> CompressionResult:
    """Multistart driver over the raw objective operator ``a`` (``F = Tr[a C]``).

    Start ``i`` uses ``init_circuit(..., seed=seed + i)``. The returned
    history and update deltas belong to the winning start; ``sweeps_run``
    counts only its sweeps while ``contraction_count`` sums all starts.
    """
    cfg = config or MultistartConfig()
    warm = min(cfg.warmup, n_sweeps)
    runs = []
    for i in range(cfg.n_starts):
        c0 = init_circuit(n_qubits, depth, cfg.init_scale, seed + i)
        r = _run(c0, a, warm if cfg.n_starts > 1 else n_sweeps, early_stop)
        log.info("start %d: objective %.12g after %d sweeps", seed + i, r.objective_history[-1], r.sweeps_run)
        runs.append(r)
    best = max(runs, key=lambda r: r.objective_history[-1])
    total = sum(r.contraction_count for r in runs)
    rest = n_sweeps - best.sweeps_run
    if cfg.n_starts == 1 or rest <= 0 or best.sweeps_run < warm:
        best.contraction_count = total
        return best
    offset = best.sweeps_run
    cb = None if callback is None else (lambda k, f: callback(k + offset, f))
    more = _run(best.circuit, a, rest, early_stop, callback=cb)
    return CompressionResult(more.circuit, best.objective_history + more.objective_history,
                             best.update_deltas + more.update_deltas, best.sweeps_run + more.sweeps_run,
                             total + more.contraction_count)


def compress_to_mpo(circuit: BrickWallCircuit, u_ref: MatrixProductOperator, n_sweeps: int,
                    early_stop: int = 20, debug: bool = False, callback=None) -> CompressionResult:
    """Maximize ``Re Tr[U_ref^dagger C]`` by polar updates on a zigzag sweep."""
    return _run(circuit, u_ref.dagger(), n_sweeps, early_stop, debug=debug, callback=callback)


def state_target_mpo(target: MatrixProductState) -> MatrixProductOperator:
    """``|0...0><target|`` as an MPO, the objective operator for state preparation."""
    ts = []
    for t in target.tensors:
        w = np.zeros((2,) + t.shape, dtype=np.complex128)
        w[0] = np.conj(t)
        ts.append(w)
    return MatrixProductOperator(ts)


def compress_to_state(circuit: BrickWallCircuit, target: MatrixProductState, n_sweeps: int,
                      early_stop: int = 20, debug: bool = False, callback=None) -> CompressionResult:
    """Maximize ``Re <target|C|0...0>``."""
    return _run(circuit, state_target_mpo(target), n_sweeps, early_stop, debug=debug, callback=callback)


def trace_overlap(circuit: BrickWallCircuit, u_ref: MatrixProductOperator) -> complex:
    """``Tr[U_ref^dagger C]``."""
    return _Network(circuit, u_ref.dagger()).objective_from_scratch()


def gate_environment(circuit: BrickWallCircuit, target_ref: MatrixProductOperator, layer: int, position: int,
                     cache: EnvironmentCache | None = None) -> np.ndarray:
    """Environment ``E`` of one gate with ``Tr[target_ref^dagger C] = Tr[E^dagger G]``."""
    if (layer, position) not in circuit.gates:
        raise IndexError(f"no gate at layer {layer}, position {position}")
    net = _Network(circuit, target_ref.dagger(), cache)
    net.build_right()
    net.cache.left = {}
    for q in range(position):
        net.optimize_column(q, upward=True, record=[], update=False)
    pl, pr = net.halves(position)
    layers = net.column_layers(position)
    j = layers.index(layer)
    for k, l in enumerate(layers):
        if k < j:
            pl = _absorb(pl, circuit.gates[(l, position)], k, "left")
        elif k > j:
            pr = _absorb(pr, circuit.gates[(l, position)], k, "right")
    return np.conj(_gate_env_raw(pl, pr, j))


def fidelity_metric_f(circuit: BrickWallCircuit, target: MatrixProductState) -> float:
    """``Re <MPS|C|0...0>``."""
    return _Network(circuit, state_target_mpo(target)).objective_from_scratch().real


def delta_from_overlap(re_tr: float, n: int) -> float:
    """``sqrt(2 - ReTr**(1/n))``; ``sqrt(2)`` with a warning when ``ReTr <= 0``."""
    if re_tr <= 0:
        warnings.warn("Re Tr[U_ref^dagger U] <= 0; reporting delta = sqrt(2)", RuntimeWarning, stacklevel=2)
        return float(np.sqrt(2.0))
    # 2 - r**(1/n) = -2 expm1(log(r / 2**n) / n), free of cancellation near r = 2**n
    return float(np.sqrt(max(0.0, -2.0 * np.expm1((np.log(re_tr) - n * np.log(2.0)) / n))))


def distance_metric_delta(circuit: BrickWallCircuit, u_ref: MatrixProductOperator) -> float:
    return delta_from_overlap(trace_overlap(circuit, u_ref).real, circuit.n_qubits)


def dense_delta(u: np.ndarray, u_ref: np.ndarray, n: int) -> float:
    """δ between two dense unitaries (used for Trotter baselines)."""
    return delta_from_overlap(float(np.trace(u_ref.conj().T @ u).real), n)


def mpo_delta(u: MatrixProductOperator, u_ref: MatrixProductOperator) -> float:
    """δ between two MPOs via an MPO-MPO trace contraction."""
    e = np.ones((1, 1), dtype=np.complex128)
    for a, b in zip(u_ref.tensors, u.tensors):
        e = np.einsum("ab,oiac,oibd->cd", e, a.conj(), b, optimize=True)
    return delta_from_overlap(float(e[0, 0].real), u.n_sites)



def concatenation_errors(u_step: np.ndarray, exact_step: np.ndarray, max_steps: int) -> list[tuple[int, float, float]]:
    """Dense check of the error-accumulation bound for repeated steps.

    Returns ``(n, ||E^n - U^n||_F, n * ||E - U||_F)`` for ``n = 1..max_steps``,
    with ``E`` the exact single-step propagator.
    """
    one = float(np.linalg.norm(exact_step - u_step))
    out = []
    e, u = np.eye(len(u_step), dtype=np.complex128), np.eye(len(u_step), dtype=np.complex128)
    for n in range(1, max_steps + 1):
        e, u = exact_step @ e, u_step @ u
        out.append((n, float(np.linalg.norm(e - u)), n * one))
    return out
